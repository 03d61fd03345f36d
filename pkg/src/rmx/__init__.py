"""Survival risk-model evaluation and fairness analytics engine."""

from ._backend import active_backend
from .cohort import CohortSnapshot, load_csv, save_csv
from .errors import (
    CalibrationError,
    ComputationError,
    ConvergenceError,
    DataError,
    DegenerateInputError,
    MissingCovariateError,
    ParseError,
    RangeError,
    RmxError,
    SchemaError,
    UnknownVariableError,
)
from .explain import beeswarm_sample, parallel_trends, shap_linear
from .fairness import (
    AuditConfig,
    ProtectedSplit,
    SensitiveSubspace,
    audit_individual,
    fair_distance,
    fit_sensitive_subspace,
    group_fairness,
    statistical_parity_difference,
    tpr_difference,
    violation_rate,
)
from .riskmodels import (
    ModelTerm,
    RiskModel,
    Threshold,
    Transform,
    builtin_models,
    classify,
    estimate_risk,
    invert_risk,
    score,
)
from .schema import VariableSchema, builtin_schema, load_schema, save_schema
from .subgroups import SubgroupPartition, SubgroupSpec, build_partition, partition_counts
from .survival import KMCurve, c_index, calibration_slope, concordance_counts, km_fit
from .synth import SynthSpec, default_synth_spec, generate_synthetic

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "CalibrationError",
    "CohortSnapshot",
    "ComputationError",
    "ConvergenceError",
    "DataError",
    "DegenerateInputError",
    "KMCurve",
    "MissingCovariateError",
    "ModelTerm",
    "ParseError",
    "ProtectedSplit",
    "RangeError",
    "RiskModel",
    "RmxError",
    "SchemaError",
    "SensitiveSubspace",
    "SubgroupPartition",
    "SubgroupSpec",
    "SynthSpec",
    "Threshold",
    "Transform",
    "UnknownVariableError",
    "VariableSchema",
    "active_backend",
    "audit_individual",
    "beeswarm_sample",
    "builtin_models",
    "builtin_schema",
    "c_index",
    "calibration_slope",
    "classify",
    "concordance_counts",
    "default_synth_spec",
    "estimate_risk",
    "fair_distance",
    "fit_sensitive_subspace",
    "generate_synthetic",
    "group_fairness",
    "invert_risk",
    "km_fit",
    "load_csv",
    "load_schema",
    "parallel_trends",
    "partition_counts",
    "build_partition",
    "save_csv",
    "save_schema",
    "score",
    "shap_linear",
    "statistical_parity_difference",
    "tpr_difference",
    "violation_rate",
]
