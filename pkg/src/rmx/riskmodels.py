"""Linear survival risk scores and the horizon-risk transform.

A model is a sum of coefficient * transform(covariate) terms plus the pair
(c, bias) that converts a score into horizon risk:

    risk = 1 - c ** exp(score - bias)

which is strictly increasing in score and has the closed-form inverse

    score = bias + ln(ln(1 - risk) / ln(c))

used to keep risk-domain and score-domain thresholds synchronized.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import MissingCovariateError, SchemaError, UnknownVariableError

TRANSFORM_KINDS = ("identity", "scale", "scaled_square", "indicator_ge", "indicator_eq")


@dataclass(frozen=True)
class Transform:
    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise SchemaError(f"unknown transform kind {self.kind!r}")
        if self.kind == "identity":
            if self.param is not None:
                raise SchemaError("identity transform takes no parameter")
        elif self.param is None:
            raise SchemaError(f"{self.kind} transform needs a parameter")
        elif self.kind in ("scale", "scaled_square") and not self.param > 0:
            raise SchemaError("scale divisor must be positive")

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return values
        if self.kind == "scale":
            return values / self.param
        if self.kind == "scaled_square":
            return (values / self.param) ** 2
        if self.kind == "indicator_ge":
            return (values >= self.param).astype(np.float64)
        return (values == self.param).astype(np.float64)

    def label(self, variable: str) -> str:
        if self.kind == "identity":
            return variable
        if self.kind == "scale":
            return f"{variable}/{self.param:g}"
        if self.kind == "scaled_square":
            return f"({variable}/{self.param:g})^2"
        if self.kind == "indicator_ge":
            return f"{variable}>={self.param:g}"
        return f"{variable}=={self.param:g}"


@dataclass(frozen=True)
class ModelTerm:
    variable: str
    transform: Transform
    coefficient: float
    display: str | None = None

    @property
    def display_name(self) -> str:
        return self.display if self.display is not None else self.variable


@dataclass(frozen=True)
class RiskModel:
    name: str
    terms: tuple[ModelTerm, ...]
    c: float
    bias: float
    horizon_days: int = 1826

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not 0.0 < self.c < 1.0:
            raise SchemaError(f"{self.name}: c must lie in (0, 1)")
        if self.horizon_days <= 0:
            raise SchemaError(f"{self.name}: horizon must be positive")

    def variables(self) -> tuple[str, ...]:
        seen = []
        for term in self.terms:
            if term.variable not in seen:
                seen.append(term.variable)
        return tuple(seen)

    def display_features(self) -> tuple[str, ...]:
        seen = []
        for term in self.terms:
            if term.display_name not in seen:
                seen.append(term.display_name)
        return tuple(seen)

    def term_labels(self) -> tuple[str, ...]:
        return tuple(t.transform.label(t.variable) for t in self.terms)

    def coefficients(self) -> np.ndarray:
        return np.array([t.coefficient for t in self.terms], np.float64)


# ---------------------------------------------------------------------------
# evaluation

def _column(columns, name, n_expected=None):
    try:
        values = columns[name]
    except KeyError:
        raise UnknownVariableError(name) from None
    values = np.asarray(values, np.float64)
    if n_expected is not None and values.shape[0] != n_expected:
        raise SchemaError(f"column {name} has length {values.shape[0]}, expected {n_expected}")
    return values


def _check_missing(model, columns, n):
    for name in model.variables():
        missing = np.isnan(_column(columns, name, n))
        if missing.any():
            raise MissingCovariateError(int(np.flatnonzero(missing)[0]), name)


def term_matrix(model: RiskModel, columns, rows=None) -> np.ndarray:
    """Transformed term values, one column per model term, shape (n, n_terms).

    `columns` maps variable name -> value vector; `rows` optionally selects
    a subset. Missing covariates raise with the first offending row index
    (an index into the selected rows).
    """
    first = next(iter(columns.values()))
    n_full = np.asarray(first).shape[0]
    cache = {}
    for name in model.variables():
        values = _column(columns, name, n_full)
        if rows is not None:
            values = values[rows]
        cache[name] = values
    n = next(iter(cache.values())).shape[0] if cache else 0
    _check_missing(model, cache, n)
    out = np.empty((n, len(model.terms)), np.float64)
    for k, term in enumerate(model.terms):
        out[:, k] = term.transform.apply(cache[term.variable])
    return out


def score_columns(model: RiskModel, columns, rows=None) -> np.ndarray:
    return term_matrix(model, columns, rows) @ model.coefficients()


def snapshot_columns(snapshot) -> dict:
    return {var.name: snapshot.covariates[i] for i, var in enumerate(snapshot.schema)}


def score(model: RiskModel, snapshot, rows=None) -> np.ndarray:
    """Per-patient linear score over a snapshot (optionally a row subset)."""
    return score_columns(model, snapshot_columns(snapshot), rows)


def estimate_risk(model: RiskModel, scores) -> np.ndarray:
    scores = np.asarray(scores, np.float64)
    return -np.expm1(np.exp(scores - model.bias) * math.log(model.c))


def invert_risk(model: RiskModel, risk: float) -> float:
    if not 0.0 < risk < 1.0:
        raise ValueError(f"risk must lie strictly inside (0, 1), got {risk}")
    return model.bias + math.log(math.log1p(-risk) / math.log(model.c))


@dataclass(frozen=True)
class Threshold:
    risk_value: float
    score_value: float
    model_name: str

    @classmethod
    def from_risk(cls, model: RiskModel, risk: float) -> "Threshold":
        return cls(risk, invert_risk(model, risk), model.name)


def classify(model: RiskModel, threshold: Threshold, scores=None, risks=None) -> np.ndarray:
    """1 = high risk. Inclusive at the boundary in both domains."""
    if threshold.model_name != model.name:
        raise ValueError(f"threshold for {threshold.model_name!r} applied to {model.name!r}")
    if (scores is None) == (risks is None):
        raise ValueError("pass exactly one of scores or risks")
    if risks is not None:
        return (np.asarray(risks, np.float64) >= threshold.risk_value).astype(np.int64)
    return (np.asarray(scores, np.float64) >= threshold.score_value).astype(np.int64)


# ---------------------------------------------------------------------------
# registry and serialization

def _t(variable, transform, coefficient, display=None):
    return ModelTerm(variable, transform, coefficient, display)


_ID = Transform("identity")


def builtin_models() -> tuple[RiskModel, ...]:
    ehr_af = RiskModel(
        name="ehr-af",
        terms=(
            _t("sex", _ID, 0.137),
            _t("age", Transform("scale", 10), 1.494),
            _t("age", Transform("scaled_square", 10), -0.048),
            _t("race", _ID, -0.208),
            _t("smoking", _ID, 0.152),
            _t("height", Transform("scale", 10), -0.231),
            _t("height", Transform("scaled_square", 10), 0.012),
            _t("weight", Transform("scale", 15), -0.050),
            _t("weight", Transform("scaled_square", 15), 0.021),
            _t("dbp", Transform("indicator_ge", 80), -0.104),
            _t("hypertension", _ID, 0.106),
            _t("hyperlipidemia", _ID, -0.156),
            _t("heart_failure", _ID, 0.563),
            _t("chd", _ID, 0.210),
            _t("valvular_disease", _ID, 0.487),
            _t("stroke_tia", _ID, 0.132),
            _t("pad", _ID, 0.126),
            _t("ckd", _ID, 0.279),
            _t("hypothyroidism", _ID, -0.138),
        ),
        c=0.971,
        bias=6.454,
    )
    charge_af = RiskModel(
        name="charge-af",
        terms=(
            _t("age", Transform("scale", 10), 1.016),
            _t("race", _ID, 0.465),
            _t("smoking", _ID, 0.359),
            _t("height", Transform("scale", 10), 0.248),
            _t("weight", Transform("scale", 15), 0.115),
            _t("sbp", Transform("scale", 20), 0.197),
            _t("dbp", Transform("scale", 10), -0.101),
            _t("diabetes", _ID, 0.237),
            _t("mi", _ID, 0.496),
            _t("heart_failure", _ID, 0.701),
            _t("chd", _ID, 0.349),
        ),
        c=0.972,
        bias=12.582,
    )
    c2hest = RiskModel(
        name="c2hest",
        terms=(
            _t("age", Transform("indicator_ge", 75), 2.0),
            _t("hypertension", _ID, 1.0),
            _t("heart_failure", _ID, 2.0),
            _t("chd", _ID, 1.0),
            _t("pulmonary_disease", _ID, 1.0),
            _t("hypothyroidism", _ID, 1.0),
        ),
        c=0.975,
        bias=0.370,
    )
    return (ehr_af, charge_af, c2hest)


def model_to_json(model: RiskModel) -> dict:
    return {
        "name": model.name,
        "horizon_days": model.horizon_days,
        "c": model.c,
        "bias": model.bias,
        "terms": [
            {
                "variable": t.variable,
                "transform": {"kind": t.transform.kind, "param": t.transform.param},
                "coefficient": t.coefficient,
                "display": t.display_name,
            }
            for t in model.terms
        ],
    }


def model_from_json(doc) -> RiskModel:
    terms = []
    for entry in doc.get("terms", ()):
        tr = entry["transform"]
        param = tr.get("param")
        terms.append(ModelTerm(
            variable=entry["variable"],
            transform=Transform(tr["kind"], float(param) if param is not None else None),
            coefficient=float(entry["coefficient"]),
            display=entry.get("display"),
        ))
    return RiskModel(
        name=doc["name"],
        terms=tuple(terms),
        c=float(doc["c"]),
        bias=float(doc["bias"]),
        horizon_days=int(doc.get("horizon_days", 1826)),
    )


def load_model(path) -> RiskModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


def save_model(model: RiskModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, indent=2)
        fh.write("\n")
