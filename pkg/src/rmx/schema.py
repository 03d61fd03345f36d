"""Variable schemas: typed column declarations shared by ingestion, subgroup
building, and the fairness machinery.

A variable is continuous, binary, or categorical. Roles mark what a column may
be used for: `predictor` (model input), `subgroup` (partition axis),
`protected` (fairness attribute); a column can hold any combination.
"""

import json
from dataclasses import dataclass, field

from .errors import SchemaError, UnknownVariableError

KINDS = ("continuous", "binary", "categorical")
ROLES = ("predictor", "subgroup", "protected")


@dataclass(frozen=True)
class VariableSchema:
    name: str
    kind: str
    units: str | None = None
    roles: tuple[str, ...] = ()
    levels: tuple[str, ...] | None = None
    valid_range: tuple[float, float] | None = None
    missing_codes: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "missing_codes", tuple(self.missing_codes))
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(self.levels))
        if self.valid_range is not None:
            object.__setattr__(self, "valid_range", tuple(self.valid_range))
        if not self.name:
            raise SchemaError("variable name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        for role in self.roles:
            if role not in ROLES:
                raise SchemaError(f"{self.name}: unknown role {role!r}")
        if self.kind == "categorical":
            if not self.levels or len(self.levels) < 2:
                raise SchemaError(f"{self.name}: categorical needs >= 2 levels")
        if self.kind == "binary" and self.levels is not None and len(self.levels) != 2:
            raise SchemaError(f"{self.name}: binary levels must be a pair")
        if self.kind == "continuous" and self.levels is not None:
            raise SchemaError(f"{self.name}: continuous variable cannot have levels")
        if self.levels is not None and len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"{self.name}: duplicate level labels")
        if self.valid_range is not None:
            if self.kind != "continuous":
                raise SchemaError(f"{self.name}: valid_range only applies to continuous")
            lo, hi = self.valid_range
            if not lo < hi:
                raise SchemaError(f"{self.name}: valid_range min must be < max")

    @property
    def n_levels(self) -> int:
        if self.kind == "continuous":
            raise SchemaError(f"{self.name}: continuous variable has no levels")
        return 2 if self.kind == "binary" else len(self.levels)

    def level_labels(self) -> tuple[str, ...]:
        """Display labels for each stored code, 0..n_levels-1."""
        if self.kind == "continuous":
            raise SchemaError(f"{self.name}: continuous variable has no levels")
        if self.levels is not None:
            return self.levels
        return ("0", "1")

    def level_index(self, label: str) -> int:
        try:
            return self.level_labels().index(label)
        except ValueError:
            raise SchemaError(f"{self.name}: unknown level {label!r}") from None

    def parse(self, raw: str) -> float:
        """Parse one CSV cell to the stored numeric code; NaN when missing.

        Raises ValueError with a bare message; the caller owns row/column
        context.
        """
        text = raw.strip()
        if text == "" or text in self.missing_codes:
            return float("nan")
        if self.kind == "continuous":
            return float(text)
        if self.kind == "binary":
            if text in ("0", "1"):
                return float(text)
            if self.levels is not None and text in self.levels:
                return float(self.levels.index(text))
            raise ValueError(f"expected 0/1{' or a level label' if self.levels else ''}, got {text!r}")
        if text in self.levels:
            return float(self.levels.index(text))
        raise ValueError(f"unknown level {text!r}")

    def format(self, value: float) -> str:
        """Inverse of parse for non-missing values; missing renders as ''."""
        if value != value:
            return ""
        if self.kind == "continuous":
            return repr(float(value))   # numpy scalars repr as np.float64(...)
        labels = self.levels
        if labels is None:
            return str(int(value))
        return labels[int(value)]


def schema_to_json(schema) -> list:
    out = []
    for var in schema:
        out.append({
            "name": var.name,
            "kind": var.kind,
            "units": var.units,
            "roles": list(var.roles),
            "levels": list(var.levels) if var.levels is not None else None,
            "valid_range": list(var.valid_range) if var.valid_range is not None else None,
            "missing_codes": list(var.missing_codes),
        })
    return out


def schema_from_json(doc) -> tuple[VariableSchema, ...]:
    if not isinstance(doc, list):
        raise SchemaError("schema document must be a JSON list")
    out = []
    for entry in doc:
        unknown = set(entry) - {"name", "kind", "units", "roles", "levels",
                                "valid_range", "missing_codes"}
        if unknown:
            raise SchemaError(f"unknown schema fields: {sorted(unknown)}")
        out.append(VariableSchema(
            name=entry.get("name", ""),
            kind=entry.get("kind", ""),
            units=entry.get("units"),
            roles=tuple(entry.get("roles") or ()),
            levels=tuple(entry["levels"]) if entry.get("levels") is not None else None,
            valid_range=tuple(entry["valid_range"]) if entry.get("valid_range") is not None else None,
            missing_codes=tuple(entry.get("missing_codes") or ()),
        ))
    names = [v.name for v in out]
    if len(set(names)) != len(names):
        raise SchemaError("duplicate variable names in schema")
    return tuple(out)


def load_schema(path) -> tuple[VariableSchema, ...]:
    with open(path, encoding="utf-8") as fh:
        return schema_from_json(json.load(fh))


def save_schema(schema, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema_to_json(schema), fh, indent=2)
        fh.write("\n")


def find(schema, name: str) -> VariableSchema:
    for var in schema:
        if var.name == name:
            return var
    raise UnknownVariableError(name)


def _b(name, p_roles=("predictor",), levels=None):
    return VariableSchema(name, "binary", roles=p_roles, levels=levels)


INCOME_LEVELS = ("lt_18k", "18k_31k", "31k_52k", "52k_100k", "gt_100k")
INCOME_MISSING = ("Do not know", "Prefer not to answer")


def builtin_schema() -> tuple[VariableSchema, ...]:
    """Default atrial-fibrillation cohort schema covering every variable the
    built-in risk models reference, plus income and an unmeasured comorbidity
    flag used only by the synthetic generator's true-hazard model."""
    return (
        _b("sex", ("predictor", "subgroup", "protected"), ("female", "male")),
        VariableSchema("age", "continuous", units="years",
                       roles=("predictor", "subgroup"), valid_range=(0.0, 120.0)),
        _b("race", ("predictor", "subgroup", "protected"), ("nonwhite", "white")),
        _b("smoking", ("predictor", "subgroup")),
        VariableSchema("height", "continuous", units="cm",
                       roles=("predictor",), valid_range=(100.0, 250.0)),
        VariableSchema("weight", "continuous", units="kg",
                       roles=("predictor",), valid_range=(25.0, 300.0)),
        VariableSchema("sbp", "continuous", units="mmHg",
                       roles=("predictor",), valid_range=(50.0, 280.0)),
        VariableSchema("dbp", "continuous", units="mmHg",
                       roles=("predictor",), valid_range=(30.0, 170.0)),
        _b("hypertension", ("predictor", "subgroup")),
        _b("diabetes", ("predictor", "subgroup")),
        _b("hyperlipidemia"),
        _b("heart_failure"),
        _b("chd"),
        _b("mi"),
        _b("valvular_disease"),
        _b("stroke_tia"),
        _b("pad"),
        _b("ckd"),
        _b("pulmonary_disease"),
        _b("hypothyroidism"),
        VariableSchema("income", "categorical", units="GBP/yr",
                       roles=("subgroup", "protected"), levels=INCOME_LEVELS,
                       missing_codes=INCOME_MISSING),
        VariableSchema("unmeasured_comorbidity", "binary", roles=()),
    )
