"""Model-behavior explanations.

For linear scores the SHAP decomposition is exact and closed-form: each
transformed term contributes coefficient * (value - reference mean), and term
contributions are summed per display feature (age and squared age both land
on "age"). The reference is the audited subgroup's mean patient, so a
record's attributions sum to its score minus the subgroup-average score.
"""

from dataclasses import dataclass

import numpy as np

from . import riskmodels
from .errors import DegenerateInputError


@dataclass(frozen=True)
class ShapPayload:
    features: tuple[str, ...]
    rows: np.ndarray          # snapshot row index per record
    phi: np.ndarray           # (n, n_features) attributions, score units
    norm_values: np.ndarray   # (n, n_features) min-max normalized raw values
    reference_score: float
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "features": list(self.features),
            "reference_score": self.reference_score,
            "records": [
                {
                    "row": int(self.rows[i]),
                    "phi": [float(v) for v in self.phi[i]],
                    "norm": [float(v) for v in self.norm_values[i]],
                }
                for i in range(self.rows.shape[0])
            ],
            "flags": list(self.flags),
        }


def _feature_raw_values(model, columns, rows):
    """Raw covariate vector backing each display feature, for color scales."""
    features = model.display_features()
    by_display = {}
    for term in model.terms:
        by_display.setdefault(term.display_name, term.variable)
    out = np.empty((rows.shape[0], len(features)), np.float64)
    for j, feat in enumerate(features):
        out[:, j] = np.asarray(columns[by_display[feat]], np.float64)[rows]
    return out


def shap_linear(model, snapshot, rows, reference=None) -> ShapPayload:
    """Exact linear SHAP per record over the given rows.

    `reference` optionally overrides the per-term reference means (defaults
    to the rows' own term means). Additivity: phi sums to
    score(x) - score(reference) for every record, exactly.
    """
    rows = np.asarray(rows, np.int64)
    if rows.size == 0:
        raise DegenerateInputError("no rows to explain", "empty")
    columns = riskmodels.snapshot_columns(snapshot)
    T = riskmodels.term_matrix(model, columns, rows)
    coef = model.coefficients()
    ref = T.mean(axis=0) if reference is None else np.asarray(reference, np.float64)
    term_phi = (T - ref) * coef

    features = model.display_features()
    index = {name: j for j, name in enumerate(features)}
    phi = np.zeros((rows.shape[0], len(features)))
    for k, term in enumerate(model.terms):
        phi[:, index[term.display_name]] += term_phi[:, k]

    raw = _feature_raw_values(model, columns, rows)
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    flags = tuple(f"constant_feature:{features[j]}"
                  for j in range(len(features)) if span[j] == 0)
    safe_span = np.where(span > 0, span, 1.0)
    norm = np.where(span > 0, (raw - lo) / safe_span, 0.5)
    return ShapPayload(
        features=features,
        rows=rows,
        phi=phi,
        norm_values=norm,
        reference_score=float(coef @ ref),
        flags=flags,
    )


def beeswarm_sample(payload: ShapPayload, fraction: float, seed: int) -> ShapPayload:
    """Deterministic sample of records, features reordered by descending
    mean |phi| over the sample."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    n = payload.rows.shape[0]
    if n == 0:
        raise DegenerateInputError("no records to sample", "empty")
    size = max(1, round(fraction * n))
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(n, size=size, replace=False))
    phi = payload.phi[picks]
    order = np.argsort(-np.abs(phi).mean(axis=0), kind="stable")
    return ShapPayload(
        features=tuple(payload.features[j] for j in order),
        rows=payload.rows[picks],
        phi=phi[:, order],
        norm_values=payload.norm_values[np.ix_(picks, order)],
        reference_score=payload.reference_score,
        flags=payload.flags,
    )


@dataclass(frozen=True)
class ParallelTrendsSummary:
    features: tuple[str, ...]
    labels: tuple[str, ...]             # subgroup labels, partition order
    means: np.ndarray                   # (n_subgroups, n_features)
    stds: np.ndarray
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "features": list(self.features),
            "subgroups": {
                label: {
                    "means": [None if v != v else float(v) for v in self.means[g]],
                    "stds": [None if v != v else float(v) for v in self.stds[g]],
                }
                for g, label in enumerate(self.labels)
            },
            "flags": list(self.flags),
        }


def parallel_trends(snapshot, partition, features) -> ParallelTrendsSummary:
    """Per-subgroup mean/std of each feature min-max normalized over all
    included patients, so subgroups share one axis per feature. Constant
    features normalize to 0.5 and are flagged."""
    features = tuple(features)
    included = np.concatenate([g.members for g in partition.subgroups]) \
        if partition.subgroups else np.empty(0, np.int64)
    n_groups = len(partition.subgroups)
    means = np.full((n_groups, len(features)), np.nan)
    stds = np.full((n_groups, len(features)), np.nan)
    flags = []
    for j, name in enumerate(features):
        values, missing = snapshot.column(name)
        pool = values[included]
        pool = pool[~np.isnan(pool)]
        if pool.size == 0:
            flags.append(f"all_missing:{name}")
            lo, span = 0.0, 0.0
        else:
            lo = float(pool.min())
            span = float(pool.max()) - lo
            if span == 0:
                flags.append(f"constant_feature:{name}")
        for g, group in enumerate(partition.subgroups):
            vals = values[group.members]
            vals = vals[~np.isnan(vals)]
            if vals.size == 0:
                flags.append(f"no_values:{name}:{group.label}")
                continue
            normed = (vals - lo) / span if span > 0 else np.full(vals.shape, 0.5)
            means[g, j] = normed.mean()
            stds[g, j] = normed.std()
    return ParallelTrendsSummary(
        features=features,
        labels=tuple(g.label for g in partition.subgroups),
        means=means,
        stds=stds,
        flags=tuple(flags),
    )
