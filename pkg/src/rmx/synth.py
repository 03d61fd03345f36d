"""Synthetic cohort generation.

Covariates are drawn through a Gaussian latent per variable; confounders mix
source latents into a target's latent and the mix is re-standardized, so
target marginals are preserved while rank correlations appear. Event times
are exponential with hazard proportional to exp(score - mean score) under a
designated true-hazard model; the base rate is calibrated by bisection so the
pre-censoring incidence at the horizon matches the target. Censoring is
administrative at the horizon, plus optional uniform dropout.

Everything is driven by one seeded generator with a fixed draw order, so a
spec reproduces its cohort bit for bit.
"""

import json
import math
from dataclasses import dataclass, field, replace
from statistics import NormalDist

import numpy as np

from . import riskmodels, schema as schema_mod
from .cohort import CohortSnapshot, make_snapshot
from .errors import CalibrationError, SchemaError

_NORM = NormalDist()


@dataclass(frozen=True)
class ContinuousMarginal:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std >= 0:
            raise SchemaError("continuous marginal std must be >= 0")


@dataclass(frozen=True)
class BinaryMarginal:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise SchemaError("binary marginal p must lie in [0, 1]")


@dataclass(frozen=True)
class CategoricalMarginal:
    proportions: tuple[float, ...]
    missing_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "proportions", tuple(float(p) for p in self.proportions))
        if abs(sum(self.proportions) - 1.0) > 1e-9:
            raise SchemaError("categorical proportions must sum to 1")
        if any(p < 0 for p in self.proportions):
            raise SchemaError("categorical proportions must be non-negative")
        if not 0.0 <= self.missing_rate < 1.0:
            raise SchemaError("missing_rate must lie in [0, 1)")


@dataclass(frozen=True)
class Confounder:
    source: str
    target: str
    effect: float


@dataclass(frozen=True)
class SynthSpec:
    n: int
    seed: int
    marginals: dict
    outcome_model: riskmodels.RiskModel
    target_incidence: float
    horizon_days: int
    confounders: tuple[Confounder, ...] = ()
    schema: tuple[schema_mod.VariableSchema, ...] = field(default_factory=schema_mod.builtin_schema)
    dropout_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "confounders", tuple(self.confounders))
        object.__setattr__(self, "schema", tuple(self.schema))
        if self.n <= 0:
            raise SchemaError("n must be positive")
        if not 0.0 < self.target_incidence < 1.0:
            raise SchemaError("target_incidence must lie in (0, 1)")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise SchemaError("dropout_rate must lie in [0, 1)")
        names = [v.name for v in self.schema]
        for name in names:
            if name not in self.marginals:
                raise SchemaError(f"no marginal for variable {name!r}")
        for name in self.marginals:
            if name not in names:
                raise SchemaError(f"marginal for unknown variable {name!r}")
        order = {name: i for i, name in enumerate(names)}
        for conf in self.confounders:
            if conf.source not in order or conf.target not in order:
                raise SchemaError(f"confounder references unknown variable: {conf}")
            if order[conf.source] >= order[conf.target]:
                raise SchemaError(
                    f"confounder source {conf.source!r} must precede target {conf.target!r}")
        for name in self.outcome_model.variables():
            if name not in order:
                raise SchemaError(f"outcome model variable {name!r} not in schema")
            marg = self.marginals[name]
            if isinstance(marg, CategoricalMarginal) and marg.missing_rate > 0:
                raise SchemaError(f"outcome model variable {name!r} has missing values")


def _marginal_for(var: schema_mod.VariableSchema, marg):
    expected = {
        "continuous": ContinuousMarginal,
        "binary": BinaryMarginal,
        "categorical": CategoricalMarginal,
    }[var.kind]
    if not isinstance(marg, expected):
        raise SchemaError(f"{var.name}: marginal kind does not match schema kind")
    if isinstance(marg, CategoricalMarginal) and len(marg.proportions) != var.n_levels:
        raise SchemaError(f"{var.name}: proportion count does not match level count")
    return marg


def generate_synthetic(spec: SynthSpec) -> CohortSnapshot:
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    weights = {}
    for conf in spec.confounders:
        weights.setdefault(conf.target, []).append((conf.source, conf.effect))

    latents = {}
    values = {}
    covariates = np.empty((len(spec.schema), n), np.float64)
    for i, var in enumerate(spec.schema):
        marg = _marginal_for(var, spec.marginals[var.name])
        z = rng.standard_normal(n)
        mixed = weights.get(var.name, ())
        if mixed:
            scale_sq = 1.0
            for source, effect in mixed:
                z = z + effect * latents[source]
                scale_sq += effect * effect
            z = z / math.sqrt(scale_sq)
        latents[var.name] = z
        if var.kind == "continuous":
            x = marg.mean + marg.std * z
            if var.valid_range is not None:
                x = np.clip(x, var.valid_range[0], var.valid_range[1])
        elif var.kind == "binary":
            if marg.p <= 0.0:
                x = np.zeros(n)
            elif marg.p >= 1.0:
                x = np.ones(n)
            else:
                x = (z > _NORM.inv_cdf(1.0 - marg.p)).astype(np.float64)
        else:
            cum = np.cumsum(marg.proportions)[:-1]
            edges = np.array([_NORM.inv_cdf(min(max(c, 1e-12), 1 - 1e-12)) for c in cum])
            x = np.searchsorted(edges, z).astype(np.float64)
            if marg.missing_rate > 0.0:
                miss = rng.random(n) < marg.missing_rate
                x[miss] = np.nan
        values[var.name] = x
        covariates[i] = x

    scores = riskmodels.score_columns(spec.outcome_model, values)
    centered = scores - scores.mean()
    u = 1.0 - rng.random(n)
    base = -np.log(u) / np.exp(centered)

    horizon = float(spec.horizon_days)
    lam = _calibrate_rate(base, horizon, spec.target_incidence)
    event_time = base / lam

    censor = np.full(n, horizon)
    if spec.dropout_rate > 0.0:
        dropped = rng.random(n) < spec.dropout_rate
        dropout_time = rng.random(n) * horizon
        censor = np.where(dropped, np.minimum(dropout_time, horizon), horizon)

    events = (event_time <= censor).astype(np.int64)
    followup = np.ceil(np.minimum(event_time, censor))
    return make_snapshot(spec.schema, covariates, followup, events,
                         [("generated", n)])


def _calibrate_rate(base: np.ndarray, horizon: float, target: float,
                    lo: float = 1e-10, hi: float = 10.0, steps: int = 100) -> float:
    def incidence(lam):
        return float(np.mean(base <= lam * horizon))

    inc_lo, inc_hi = incidence(lo), incidence(hi)
    if not inc_lo <= target <= inc_hi:
        raise CalibrationError(target, inc_lo, inc_hi)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if incidence(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# default spec anchored to the UK-Biobank-style population profile

def synthetic_truth_model() -> riskmodels.RiskModel:
    """The generator's true-hazard model: the ehr-af terms plus a comorbidity
    flag none of the registered models observe, so discrimination degrades
    where that flag varies most."""
    base = riskmodels.builtin_models()[0]
    extra = riskmodels.ModelTerm("unmeasured_comorbidity", riskmodels.Transform("identity"), 1.3)
    return replace(base, name="synthetic-truth", terms=base.terms + (extra,))


_INCOME_REPORTED = np.array([19.5, 22.1, 21.9, 16.9, 4.5])


def default_marginals() -> dict:
    income = tuple(_INCOME_REPORTED / _INCOME_REPORTED.sum())
    return {
        "sex": BinaryMarginal(0.45),
        "age": ContinuousMarginal(58.4, 7.0),
        "race": BinaryMarginal(0.947),
        "smoking": BinaryMarginal(0.107),
        "height": ContinuousMarginal(168.2, 9.2),
        "weight": ContinuousMarginal(77.9, 15.8),
        "sbp": ContinuousMarginal(138.9, 18.6),
        "dbp": ContinuousMarginal(82.5, 10.1),
        "hypertension": BinaryMarginal(0.305),
        "diabetes": BinaryMarginal(0.025),
        "hyperlipidemia": BinaryMarginal(0.157),
        "heart_failure": BinaryMarginal(0.004),
        "chd": BinaryMarginal(0.04),
        "mi": BinaryMarginal(0.02),
        "valvular_disease": BinaryMarginal(0.015),
        "stroke_tia": BinaryMarginal(0.02),
        "pad": BinaryMarginal(0.01),
        "ckd": BinaryMarginal(0.02),
        "pulmonary_disease": BinaryMarginal(0.05),
        "hypothyroidism": BinaryMarginal(0.05),
        "income": CategoricalMarginal(income, missing_rate=0.151),
        "unmeasured_comorbidity": BinaryMarginal(0.2),
    }


def default_confounders() -> tuple[Confounder, ...]:
    return (
        Confounder("sex", "height", 0.9),
        Confounder("age", "sbp", 0.35),
        Confounder("age", "hypertension", 0.5),
        Confounder("age", "income", -0.65),
        Confounder("age", "unmeasured_comorbidity", 0.9),
    )


def default_synth_spec(**overrides) -> SynthSpec:
    base = dict(
        n=50_000,
        seed=42,
        marginals=default_marginals(),
        outcome_model=synthetic_truth_model(),
        target_incidence=0.0166,
        horizon_days=1826,
        confounders=default_confounders(),
        schema=schema_mod.builtin_schema(),
        dropout_rate=0.0,
    )
    base.update(overrides)
    return SynthSpec(**base)


# ---------------------------------------------------------------------------
# JSON round trip

def _marginal_to_json(marg):
    if isinstance(marg, ContinuousMarginal):
        return {"kind": "continuous", "mean": marg.mean, "std": marg.std}
    if isinstance(marg, BinaryMarginal):
        return {"kind": "binary", "p": marg.p}
    return {"kind": "categorical", "proportions": list(marg.proportions),
            "missing_rate": marg.missing_rate}


def _marginal_from_json(doc):
    kind = doc.get("kind")
    if kind == "continuous":
        return ContinuousMarginal(float(doc["mean"]), float(doc["std"]))
    if kind == "binary":
        return BinaryMarginal(float(doc["p"]))
    if kind == "categorical":
        return CategoricalMarginal(tuple(doc["proportions"]),
                                   float(doc.get("missing_rate", 0.0)))
    raise SchemaError(f"unknown marginal kind {kind!r}")


def spec_to_json(spec: SynthSpec) -> dict:
    return {
        "n": spec.n,
        "seed": spec.seed,
        "horizon_days": spec.horizon_days,
        "target_incidence": spec.target_incidence,
        "dropout_rate": spec.dropout_rate,
        "marginals": {name: _marginal_to_json(m) for name, m in spec.marginals.items()},
        "confounders": [
            {"source": c.source, "target": c.target, "effect": c.effect}
            for c in spec.confounders
        ],
        "outcome_model": riskmodels.model_to_json(spec.outcome_model),
        "schema": schema_mod.schema_to_json(spec.schema),
    }


def spec_from_json(doc) -> SynthSpec:
    schema = (schema_mod.schema_from_json(doc["schema"])
              if doc.get("schema") is not None else schema_mod.builtin_schema())
    if doc.get("outcome_model") is not None:
        outcome = riskmodels.model_from_json(doc["outcome_model"])
    else:
        outcome = synthetic_truth_model()
    return SynthSpec(
        n=int(doc["n"]),
        seed=int(doc["seed"]),
        marginals={name: _marginal_from_json(m)
                   for name, m in doc.get("marginals", {}).items()},
        outcome_model=outcome,
        target_incidence=float(doc["target_incidence"]),
        horizon_days=int(doc["horizon_days"]),
        confounders=tuple(
            Confounder(c["source"], c["target"], float(c["effect"]))
            for c in doc.get("confounders", ())
        ),
        schema=schema,
        dropout_rate=float(doc.get("dropout_rate", 0.0)),
    )


def load_spec(path) -> SynthSpec:
    with open(path, encoding="utf-8") as fh:
        return spec_from_json(json.load(fh))


def save_spec(spec: SynthSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_json(spec), fh, indent=2)
        fh.write("\n")
