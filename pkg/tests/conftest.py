from __future__ import annotations

import numpy as np
import pytest

import rmx
from rmx.synth import default_synth_spec, generate_synthetic


@pytest.fixture(scope="session")
def default_cohort():
    """Full-size synthetic cohort shared by read-only tests."""
    return generate_synthetic(default_synth_spec())


@pytest.fixture(scope="session")
def small_cohort():
    return generate_synthetic(default_synth_spec(n=2000, seed=7))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Touch every jitted kernel once so compilation time never lands inside
    # a timed acceptance test.
    rng = np.random.default_rng(0)
    scores = rng.standard_normal(30)
    times = rng.integers(1, 50, size=30).astype(np.float64)
    events = rng.integers(0, 2, size=30)
    rmx.concordance_counts(scores, times, events, method="fast")
    rmx.concordance_counts(scores, times, events, method="brute")

    snap = generate_synthetic(default_synth_spec(n=300, seed=123))
    model = {m.name: m for m in rmx.builtin_models()}["ehr-af"]
    splits = [rmx.ProtectedSplit("sex", "male", "female")]
    sub = rmx.fit_sensitive_subspace(snap, model, splits)
    from rmx.fairness import model_complete_rows, observed_box
    from rmx.riskmodels import snapshot_columns, term_matrix

    rows = model_complete_rows(snap, model)[:20]
    X = term_matrix(model, snapshot_columns(snap), rows=rows)
    lo, hi = observed_box(X)
    threshold = rmx.Threshold.from_risk(model, 0.05)
    config = rmx.AuditConfig(lam=1.0, threshold=threshold, box_lo=lo, box_hi=hi,
                             max_iters=5)
    rmx.violation_rate(X, model, sub, config)
