"""Immutable cohort snapshots, CSV ingestion, and sequential selection filters.

Storage is columnar float64; categorical and binary values are level codes,
missing is NaN. Each snapshot carries a selection ledger: (description,
rows remaining) pairs, starting from the parsed row count.
"""

import csv
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import schema as schema_mod
from .errors import ParseError, RangeError, SchemaError, UnknownVariableError

TIME_COLUMN = "followup_days"
EVENT_COLUMN = "event"


@dataclass(frozen=True)
class CohortSnapshot:
    snapshot_id: str
    schema: tuple[schema_mod.VariableSchema, ...]
    covariates: np.ndarray      # (n_vars, n) float64
    followup_time: np.ndarray   # (n,) float64 days
    event_flag: np.ndarray      # (n,) int64, 0/1
    ledger: tuple[tuple[str, int], ...]

    @property
    def n(self) -> int:
        return int(self.followup_time.shape[0])

    def variable(self, name: str) -> schema_mod.VariableSchema:
        return schema_mod.find(self.schema, name)

    def column(self, name: str):
        """Read-only value vector and missing mask for one variable."""
        for i, var in enumerate(self.schema):
            if var.name == name:
                values = self.covariates[i]
                return values, np.isnan(values)
        raise UnknownVariableError(name)

    def values(self, name: str) -> np.ndarray:
        return self.column(name)[0]


def column(snapshot: CohortSnapshot, name: str):
    return snapshot.column(name)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def make_snapshot(schema, covariates, followup_time, event_flag, ledger) -> CohortSnapshot:
    schema = tuple(schema)
    covariates = np.ascontiguousarray(covariates, np.float64)
    followup_time = np.ascontiguousarray(followup_time, np.float64)
    event_flag = np.ascontiguousarray(event_flag, np.int64)
    if covariates.shape != (len(schema), followup_time.shape[0]):
        raise SchemaError("covariate table shape does not match schema and outcomes")
    if followup_time.size and followup_time.min() < 0:
        raise SchemaError("negative follow-up time")
    if not np.isin(event_flag, (0, 1)).all():
        raise SchemaError("event flags must be 0 or 1")
    digest = hashlib.sha256()
    digest.update(json.dumps(schema_mod.schema_to_json(schema)).encode())
    digest.update(covariates.tobytes())
    digest.update(followup_time.tobytes())
    digest.update(event_flag.tobytes())
    return CohortSnapshot(
        snapshot_id=digest.hexdigest()[:16],
        schema=schema,
        covariates=_freeze(covariates),
        followup_time=_freeze(followup_time),
        event_flag=_freeze(event_flag),
        ledger=tuple((str(d), int(c)) for d, c in ledger),
    )


# ---------------------------------------------------------------------------
# selection filters

@dataclass(frozen=True)
class MinAgeRule:
    threshold: float
    variable: str = "age"

    def describe(self) -> str:
        return f"{self.variable} >= {self.threshold:g} at baseline"

    def keep(self, snapshot: CohortSnapshot) -> np.ndarray:
        values, missing = snapshot.column(self.variable)
        return ~missing & (values >= self.threshold)


@dataclass(frozen=True)
class CompleteCaseRule:
    variables: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))

    def describe(self) -> str:
        return "complete values: " + ", ".join(self.variables)

    def keep(self, snapshot: CohortSnapshot) -> np.ndarray:
        mask = np.ones(snapshot.n, bool)
        for name in self.variables:
            mask &= ~snapshot.column(name)[1]
        return mask


@dataclass(frozen=True)
class ExcludeFlagRule:
    variable: str

    def describe(self) -> str:
        return f"exclude {self.variable} = 1"

    def keep(self, snapshot: CohortSnapshot) -> np.ndarray:
        values, missing = snapshot.column(self.variable)
        if snapshot.variable(self.variable).kind != "binary":
            raise SchemaError(f"exclude_flag rule needs a binary variable, got {self.variable}")
        return missing | (values != 1.0)

    # missing flags are kept: absence of evidence is not an exclusion


@dataclass(frozen=True)
class ExcludeMissingRule:
    variable: str

    def describe(self) -> str:
        return f"exclude missing {self.variable}"

    def keep(self, snapshot: CohortSnapshot) -> np.ndarray:
        return ~snapshot.column(self.variable)[1]


_RULE_KINDS = {
    "min_age_at_baseline": lambda e: MinAgeRule(float(e["threshold"]), e.get("variable", "age")),
    "complete_case": lambda e: CompleteCaseRule(tuple(e["variables"])),
    "exclude_flag": lambda e: ExcludeFlagRule(e["variable"]),
    "exclude_missing": lambda e: ExcludeMissingRule(e["variable"]),
}


def filter_from_json(doc) -> tuple:
    rules = []
    for entry in doc:
        kind = entry.get("kind")
        if kind not in _RULE_KINDS:
            raise SchemaError(f"unknown filter rule kind {kind!r}")
        rules.append(_RULE_KINDS[kind](entry))
    return tuple(rules)


def filter_to_json(rules) -> list:
    out = []
    for rule in rules:
        if isinstance(rule, MinAgeRule):
            out.append({"kind": "min_age_at_baseline", "threshold": rule.threshold,
                        "variable": rule.variable})
        elif isinstance(rule, CompleteCaseRule):
            out.append({"kind": "complete_case", "variables": list(rule.variables)})
        elif isinstance(rule, ExcludeFlagRule):
            out.append({"kind": "exclude_flag", "variable": rule.variable})
        elif isinstance(rule, ExcludeMissingRule):
            out.append({"kind": "exclude_missing", "variable": rule.variable})
        else:
            raise SchemaError(f"unserializable rule {rule!r}")
    return out


def apply_filter(snapshot: CohortSnapshot, rules) -> CohortSnapshot:
    """Apply rules in order, appending one ledger entry per rule."""
    ledger = list(snapshot.ledger)
    cov = snapshot.covariates
    t = snapshot.followup_time
    e = snapshot.event_flag
    current = snapshot
    for rule in rules:
        keep = rule.keep(current)
        cov = cov[:, keep]
        t = t[keep]
        e = e[keep]
        ledger.append((rule.describe(), int(t.shape[0])))
        current = make_snapshot(snapshot.schema, cov, t, e, ledger)
    return current


# ---------------------------------------------------------------------------
# CSV input/output

def load_csv(path, schema, rules=()) -> CohortSnapshot:
    """Parse a cohort CSV and apply selection rules sequentially.

    The header must contain every schema variable plus `followup_days` and
    `event`; column order is free and extra columns are ignored. Error rows
    are 1-based data row ordinals (the header is row 0).
    """
    schema = tuple(schema)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        positions = {}
        for var in schema:
            if var.name not in header:
                raise SchemaError(f"{path}: missing column {var.name!r}")
            positions[var.name] = header.index(var.name)
        for reserved in (TIME_COLUMN, EVENT_COLUMN):
            if reserved not in header:
                raise SchemaError(f"{path}: missing column {reserved!r}")
        time_pos = header.index(TIME_COLUMN)
        event_pos = header.index(EVENT_COLUMN)

        columns = [[] for _ in schema]
        times = []
        events = []
        width = len(header)
        for row_no, row in enumerate(reader, start=1):
            if len(row) != width:
                raise ParseError(row_no, "", f"expected {width} cells, got {len(row)}")
            for k, var in enumerate(schema):
                raw = row[positions[var.name]]
                try:
                    value = var.parse(raw)
                except ValueError as exc:
                    raise ParseError(row_no, var.name, str(exc)) from None
                if var.valid_range is not None and value == value:
                    lo, hi = var.valid_range
                    if not lo <= value <= hi:
                        raise RangeError(row_no, var.name, value)
                columns[k].append(value)
            raw_t = row[time_pos].strip()
            try:
                t_value = int(raw_t)
            except ValueError:
                raise ParseError(row_no, TIME_COLUMN, f"expected an integer, got {raw_t!r}") from None
            if t_value < 0:
                raise RangeError(row_no, TIME_COLUMN, float(t_value))
            raw_e = row[event_pos].strip()
            if raw_e not in ("0", "1"):
                raise ParseError(row_no, EVENT_COLUMN, f"expected 0 or 1, got {raw_e!r}")
            times.append(float(t_value))
            events.append(int(raw_e))

    n = len(times)
    covariates = np.array(columns, np.float64) if n else np.empty((len(schema), 0))
    snapshot = make_snapshot(schema, covariates, np.array(times, np.float64),
                             np.array(events, np.int64), [("loaded", n)])
    return apply_filter(snapshot, rules)


def save_csv(snapshot: CohortSnapshot, path) -> None:
    """Write a snapshot; load_csv with the same schema and no rules
    round-trips it value for value."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([v.name for v in snapshot.schema] + [TIME_COLUMN, EVENT_COLUMN])
        cov = snapshot.covariates
        for i in range(snapshot.n):
            row = [var.format(cov[k, i]) for k, var in enumerate(snapshot.schema)]
            row.append(str(int(snapshot.followup_time[i])))
            row.append(str(int(snapshot.event_flag[i])))
            writer.writerow(row)
