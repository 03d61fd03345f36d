"""Report assembly shared by the CLI and the HTTP service.

Every payload here is a plain JSON-serializable dict with no NaN values;
metrics that cannot be computed are None plus a flag. Identical logical
requests over the same snapshot produce identical payloads, which is what
makes CLI reports and service responses comparable byte for byte.
"""

import numpy as np

from . import explain as explain_mod
from . import fairness as fairness_mod
from . import riskmodels, survival
from .errors import ComputationError, DegenerateInputError, SchemaError


def model_rows(snapshot, model, members) -> np.ndarray:
    """Members with a complete set of the model's covariates."""
    ok = np.ones(members.shape[0], bool)
    for name in model.variables():
        ok &= ~np.isnan(snapshot.values(name)[members])
    return members[ok]


def audit_options(doc) -> dict:
    doc = doc or {}
    unknown = set(doc) - {"lambda", "sample_fraction", "seed", "step_size", "max_iters"}
    if unknown:
        raise SchemaError(f"unknown audit options: {sorted(unknown)}")
    return {
        "lambda": float(doc.get("lambda", 1.0)),
        "sample_fraction": (float(doc["sample_fraction"])
                            if doc.get("sample_fraction") is not None else None),
        "seed": int(doc.get("seed", 0)),
        "step_size": float(doc.get("step_size", 0.1)),
        "max_iters": int(doc.get("max_iters", 500)),
    }


def _subspace_for(snapshot, model, split, cache):
    key = (model.name, split.attribute, split.privileged_level, split.unprivileged_level)
    if cache is not None and key in cache:
        return cache[key]
    subspace = fairness_mod.fit_sensitive_subspace(snapshot, model, [split])
    if cache is not None:
        cache[key] = subspace
    return subspace


def _audit_rate(snapshot, model, split, members, threshold, audit, cache):
    """Violation rate for one subgroup under one attribute's subspace."""
    try:
        subspace = _subspace_for(snapshot, model, split, cache)
    except (DegenerateInputError, ComputationError):
        return None, None, "audit_subspace_unavailable"
    columns = riskmodels.snapshot_columns(snapshot)
    all_rows = fairness_mod.model_complete_rows(snapshot, model)
    box_lo, box_hi = fairness_mod.observed_box(
        riskmodels.term_matrix(model, columns, all_rows))
    config = fairness_mod.AuditConfig(
        lam=audit["lambda"],
        threshold=threshold,
        box_lo=box_lo,
        box_hi=box_hi,
        step_size=audit["step_size"],
        max_iters=audit["max_iters"],
    )
    rows = members
    fraction = audit["sample_fraction"]
    if fraction is not None and fraction < 1.0 and rows.size > 0:
        size = max(1, round(fraction * rows.size))
        rng = np.random.default_rng([audit["seed"], rows.size, rows[0] if rows.size else 0])
        rows = np.sort(rng.choice(rows, size=size, replace=False))
    if rows.size == 0:
        return None, 0, "audit_empty_subgroup"
    X = riskmodels.term_matrix(model, columns, rows)
    rate = fairness_mod.violation_rate(X, model, subspace, config)
    return rate, int(rows.size), None


def build_summary(snapshot, partition, models, threshold_risk, splits,
                  audit=None, subspace_cache=None) -> dict:
    """The per-(subgroup x model) performance and fairness payload."""
    if not 0.0 < threshold_risk < 1.0:
        raise ValueError("threshold risk must lie strictly inside (0, 1)")
    thresholds = {m.name: riskmodels.Threshold.from_risk(m, threshold_risk) for m in models}
    display_horizon = max(m.horizon_days for m in models) if models else None

    subgroup_entries = []
    for group in partition.subgroups:
        t_members = snapshot.followup_time[group.members]
        e_members = snapshot.event_flag[group.members]
        km = survival.km_fit(t_members, e_members, display_horizon)
        model_entries = {}
        for model in models:
            rows = model_rows(snapshot, model, group.members)
            scores = riskmodels.score(model, snapshot, rows)
            risks = riskmodels.estimate_risk(model, scores)
            labels = riskmodels.classify(model, thresholds[model.name], risks=risks)
            times = snapshot.followup_time[rows]
            events = snapshot.event_flag[rows]

            flags = []
            c_index = None
            try:
                c_index = survival.c_index(scores, times, events)
            except DegenerateInputError as exc:
                flags.append(f"c_index_undefined_{exc.reason}")
            slope = None
            try:
                slope = survival.calibration_slope(scores, times, events)
            except (DegenerateInputError, ComputationError) as exc:
                reason = getattr(exc, "reason", "no_convergence")
                flags.append(f"calibration_undefined_{reason}")

            fairness_entries = {}
            for split in splits:
                priv_mask, unpriv_mask = split.masks(snapshot)
                result = fairness_mod.group_fairness(
                    labels, times, events, model.horizon_days,
                    priv_mask[rows], unpriv_mask[rows])
                entry = result.to_json()
                entry["if_violation_rate"] = None
                entry["n_audited"] = None
                if audit is not None:
                    rate, n_audited, flag = _audit_rate(
                        snapshot, model, split, rows, thresholds[model.name],
                        audit, subspace_cache)
                    entry["if_violation_rate"] = rate
                    entry["n_audited"] = n_audited
                    if flag:
                        entry["flags"] = entry["flags"] + [flag]
                else:
                    entry["flags"] = entry["flags"] + ["audit_disabled"]
                fairness_entries[split.attribute] = entry

            model_entries[model.name] = {
                "performance": {
                    "c_index": c_index,
                    "calibration_slope": slope,
                    "n": int(rows.size),
                    "events": int(events.sum()),
                    "flags": flags,
                },
                "fairness": fairness_entries,
            }
        subgroup_entries.append({
            "label": group.label,
            "count": group.count,
            "color_index": group.color_index,
            "km": km.to_json(),
            "models": model_entries,
        })

    return {
        "request": {
            "partition_id": partition.partition_id,
            "models": [m.name for m in models],
            "threshold": {"risk": threshold_risk},
            "protected": [
                {"attribute": s.attribute, "privileged": s.privileged_level,
                 "unprivileged": s.unprivileged_level}
                for s in splits
            ],
            "audit": audit,
        },
        "snapshot_id": snapshot.snapshot_id,
        "partition_id": partition.partition_id,
        "threshold": {
            "risk": threshold_risk,
            "scores": {name: t.score_value for name, t in thresholds.items()},
        },
        "subgroups": subgroup_entries,
        "excluded_missing": int(partition.excluded_missing.shape[0]),
    }


def build_distribution(snapshot, model, threshold_risk, bins=40, rows=None) -> dict:
    """Score and risk histograms plus the synchronized threshold pair."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if rows is None:
        rows = fairness_mod.model_complete_rows(snapshot, model)
    scores = riskmodels.score(model, snapshot, rows)
    risks = riskmodels.estimate_risk(model, scores)
    threshold = riskmodels.Threshold.from_risk(model, threshold_risk)
    score_counts, score_edges = np.histogram(scores, bins=bins)
    risk_counts, risk_edges = np.histogram(risks, bins=bins)
    return {
        "model": model.name,
        "n": int(rows.size),
        "score": {
            "edges": [float(e) for e in score_edges],
            "counts": [int(c) for c in score_counts],
        },
        "risk": {
            "edges": [float(e) for e in risk_edges],
            "counts": [int(c) for c in risk_counts],
        },
        "threshold": {"risk": threshold.risk_value, "score": threshold.score_value},
    }


def build_survival(snapshot, partition, horizon_days) -> dict:
    out = []
    for group in partition.subgroups:
        km = survival.km_fit(snapshot.followup_time[group.members],
                             snapshot.event_flag[group.members], horizon_days)
        out.append({
            "label": group.label,
            "color_index": group.color_index,
            "count": group.count,
            "km": km.to_json(),
        })
    return {
        "partition_id": partition.partition_id,
        "horizon_days": horizon_days,
        "subgroups": out,
    }


def build_explanation(snapshot, partition, group, model, fraction, seed) -> dict:
    """SHAP beeswarm payload plus parallel trends for one subgroup."""
    rows = model_rows(snapshot, model, group.members)
    payload = explain_mod.shap_linear(model, snapshot, rows)
    sampled = explain_mod.beeswarm_sample(payload, fraction, seed)
    trends = explain_mod.parallel_trends(snapshot, partition, model.display_features())
    doc = sampled.to_json()
    doc["trends"] = trends.to_json()
    doc["subgroup"] = group.label
    doc["model"] = model.name
    doc["fraction"] = fraction
    doc["seed"] = seed
    return doc
