"""Subgroup partitions: the cartesian product of selected variables' levels
(or user-supplied bins for continuous variables), with empty cells dropped
and rows missing any selected variable set aside.
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .cohort import CohortSnapshot
from .errors import SchemaError


@dataclass(frozen=True)
class SubgroupSpec:
    variables: tuple[str, ...]
    bins: dict | None = None    # continuous variable -> strictly increasing edges

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if not self.variables:
            raise SchemaError("subgroup spec needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise SchemaError("duplicate subgroup variables")
        bins = {k: tuple(float(e) for e in v) for k, v in (self.bins or {}).items()}
        for name, edges in bins.items():
            if len(edges) < 2 or any(a >= b for a, b in zip(edges, edges[1:])):
                raise SchemaError(f"{name}: bin edges must be strictly increasing, >= 2 of them")
        object.__setattr__(self, "bins", bins)

    def to_json(self) -> dict:
        return {"variables": list(self.variables),
                "bins": {k: list(v) for k, v in self.bins.items()}}


@dataclass(frozen=True)
class Condition:
    variable: str
    label: str
    level_index: int | None = None
    lo: float | None = None
    hi: float | None = None

    def to_json(self) -> dict:
        out = {"variable": self.variable, "label": self.label}
        if self.level_index is not None:
            out["level"] = self.label
        else:
            out["bin"] = [self.lo, self.hi]
        return out


@dataclass(frozen=True)
class Subgroup:
    label: str
    predicate: tuple[Condition, ...]
    members: np.ndarray
    color_index: int

    @property
    def count(self) -> int:
        return int(self.members.shape[0])


@dataclass(frozen=True)
class SubgroupPartition:
    partition_id: str
    snapshot_id: str
    spec: SubgroupSpec
    subgroups: tuple[Subgroup, ...]
    excluded_missing: np.ndarray

    @property
    def included(self) -> int:
        return sum(g.count for g in self.subgroups)

    def find(self, label: str) -> Subgroup:
        for group in self.subgroups:
            if group.label == label:
                return group
        raise SchemaError(f"no subgroup labeled {label!r}")

    def to_json(self, include_members: bool = False) -> dict:
        included = self.included
        out = {
            "partition_id": self.partition_id,
            "snapshot_id": self.snapshot_id,
            "spec": self.spec.to_json(),
            "subgroups": [
                {
                    "label": g.label,
                    "predicate": [c.to_json() for c in g.predicate],
                    "count": g.count,
                    "percent": 100.0 * g.count / included if included else 0.0,
                    "color_index": g.color_index,
                }
                for g in self.subgroups
            ],
            "excluded_missing": int(self.excluded_missing.shape[0]),
        }
        if include_members:
            for g, entry in zip(self.subgroups, out["subgroups"]):
                entry["members"] = [int(i) for i in g.members]
            out["excluded_missing_rows"] = [int(i) for i in self.excluded_missing]
        return out


def _axis(snapshot: CohortSnapshot, name: str, bins):
    """Per-row cell index along one variable, -1 where unassignable, plus a
    Condition per cell."""
    var = snapshot.variable(name)
    if "subgroup" not in var.roles:
        raise SchemaError(f"variable {name!r} lacks the subgroup role")
    values, missing = snapshot.column(name)
    if var.kind == "continuous":
        edges = bins.get(name)
        if edges is None:
            raise SchemaError(f"continuous variable {name!r} needs bins")
        idx = np.searchsorted(edges, values, side="right") - 1
        last = len(edges) - 2
        idx[values == edges[-1]] = last    # closed right edge on the final bin
        idx[(idx < 0) | (idx > last)] = -1
        idx[missing] = -1
        conds = []
        for b in range(last + 1):
            lo, hi = edges[b], edges[b + 1]
            bracket = "]" if b == last else ")"
            conds.append(Condition(name, f"[{lo:g},{hi:g}{bracket}", lo=lo, hi=hi))
        return idx.astype(np.int64), conds
    labels = var.level_labels()
    idx = np.where(missing, -1, values).astype(np.int64)
    conds = [Condition(name, lab, level_index=i) for i, lab in enumerate(labels)]
    return idx, conds


def build_partition(snapshot: CohortSnapshot, spec: SubgroupSpec) -> SubgroupPartition:
    """One candidate cell per combination of levels/bins, in declared order;
    empty cells are discarded, rows missing a selected variable excluded."""
    axes = [_axis(snapshot, name, spec.bins) for name in spec.variables]
    sizes = [len(conds) for _, conds in axes]

    cell = np.zeros(snapshot.n, np.int64)
    ok = np.ones(snapshot.n, bool)
    for (idx, _conds), size in zip(axes, sizes):
        cell = cell * size + np.where(idx < 0, 0, idx)
        ok &= idx >= 0

    subgroups = []
    color = 0
    for flat in range(int(math.prod(sizes))):
        remainder = flat
        picks = []
        for size in reversed(sizes):
            picks.append(remainder % size)
            remainder //= size
        picks.reverse()
        members = np.flatnonzero(ok & (cell == flat))
        if members.size == 0:
            continue
        predicate = tuple(axes[a][1][picks[a]] for a in range(len(axes)))
        label = " & ".join(f"{c.variable}={c.label}" for c in predicate)
        members = members.astype(np.int64)
        members.setflags(write=False)
        subgroups.append(Subgroup(label, predicate, members, color))
        color += 1

    excluded = np.flatnonzero(~ok).astype(np.int64)
    excluded.setflags(write=False)
    digest = hashlib.sha256()
    digest.update(snapshot.snapshot_id.encode())
    digest.update(json.dumps(spec.to_json(), sort_keys=True).encode())
    return SubgroupPartition(
        partition_id=digest.hexdigest()[:16],
        snapshot_id=snapshot.snapshot_id,
        spec=spec,
        subgroups=tuple(subgroups),
        excluded_missing=excluded,
    )


def partition_counts(partition: SubgroupPartition) -> list:
    """(label, count, percent-of-included) per subgroup."""
    included = partition.included
    return [
        (g.label, g.count, 100.0 * g.count / included if included else 0.0)
        for g in partition.subgroups
    ]
