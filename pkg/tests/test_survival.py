import numpy as np
import pytest

from rmx.errors import DegenerateInputError
from rmx.survival import (
    c_index,
    calibration_slope,
    concordance_counts,
    cox_partial_loglik,
    km_fit,
)


def test_km_hand_computed_curve():
    curve = km_fit([1, 2, 3, 4, 5], [0, 1, 0, 1, 0])
    np.testing.assert_array_equal(curve.times, [2.0, 4.0])
    # 4 at risk at t=2, 2 at risk at t=4
    np.testing.assert_array_equal(curve.at_risk, [4, 2])
    np.testing.assert_array_equal(curve.events, [1, 1])
    assert curve.survival.tolist() == [0.75, 0.375]
    assert curve.survival_at(2.0) == 0.75
    assert curve.survival_at(4.0) == 0.375


def test_km_no_events_stays_at_one():
    curve = km_fit([10, 20, 30], [0, 0, 0])
    assert curve.times.size == 0
    assert curve.survival_at(0.0) == 1.0
    assert curve.survival_at(1e9) == 1.0


def test_km_survival_at_is_right_continuous_step():
    curve = km_fit([1, 2, 3, 4, 5], [0, 1, 0, 1, 0])
    assert curve.survival_at(1.999) == 1.0
    assert curve.survival_at(2.0) == 0.75
    assert curve.survival_at(3.9) == 0.75
    assert curve.survival_at(100.0) == 0.375


def test_km_tied_event_times_share_one_step():
    curve = km_fit([5, 5, 5, 8], [1, 1, 0, 0])
    np.testing.assert_array_equal(curve.times, [5.0])
    np.testing.assert_array_equal(curve.at_risk, [4])
    np.testing.assert_array_equal(curve.events, [2])
    assert curve.survival[0] == 0.5


def test_km_all_events_reaches_zero():
    curve = km_fit([1, 2, 3], [1, 1, 1])
    assert curve.survival[-1] == 0.0


def test_km_horizon_truncates():
    curve = km_fit([1, 2, 3, 4, 5], [0, 1, 0, 1, 0], horizon_days=3)
    np.testing.assert_array_equal(curve.times, [2.0])
    assert curve.survival.tolist() == [0.75]


def test_km_empty_input():
    with pytest.raises(DegenerateInputError) as err:
        km_fit([], [])
    assert err.value.reason == "empty"


def test_km_to_json_is_plain_python():
    doc = km_fit([1, 2], [1, 0]).to_json()
    assert doc == {"times": [1.0], "survival": [0.5], "at_risk": [2], "events": [1]}
    assert type(doc["at_risk"][0]) is int


def test_cindex_perfect_reversed_tied():
    times = np.array([1.0, 2.0, 3.0, 4.0])
    events = np.array([1, 1, 1, 1])
    assert c_index([4.0, 3.0, 2.0, 1.0], times, events) == 1.0
    assert c_index([1.0, 2.0, 3.0, 4.0], times, events) == 0.0
    assert c_index([1.0, 1.0, 1.0, 1.0], times, events) == 0.5


def test_cindex_pair_conventions():
    # event at t=2 vs censored at t=2: comparable (censoring outlives the event)
    counts = concordance_counts([2.0, 1.0], [2.0, 2.0], [1, 0])
    assert counts == (1, 0, 1)
    # two events tied in time: not comparable
    counts = concordance_counts([2.0, 1.0], [2.0, 2.0], [1, 1])
    assert counts == (0, 0, 0)
    # censored before the event: not comparable
    counts = concordance_counts([2.0, 1.0], [1.0, 2.0], [0, 1])
    assert counts == (0, 0, 0)
    # censored row can only sit on the survivor side
    counts = concordance_counts([5.0, 1.0], [1.0, 9.0], [1, 0])
    assert counts == (1, 0, 1)


def test_cindex_score_ties_count_half():
    scores = [1.0, 1.0, 2.0]
    times = [1.0, 2.0, 3.0]
    events = [1, 1, 1]
    concordant, tied, comparable = concordance_counts(scores, times, events)
    assert (concordant, tied, comparable) == (0, 1, 3)
    assert c_index(scores, times, events) == pytest.approx((0 + 0.5) / 3)


def test_cindex_no_comparable_pairs():
    with pytest.raises(DegenerateInputError) as err:
        c_index([1.0, 2.0], [5.0, 5.0], [0, 0])
    assert err.value.reason == "no_comparable_pairs"


def test_cindex_methods_agree_on_random_data():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = 300
        scores = rng.integers(0, 25, n).astype(np.float64)  # heavy score ties
        times = rng.integers(1, 40, n).astype(np.float64)   # heavy time ties
        events = rng.integers(0, 2, n)
        fast = concordance_counts(scores, times, events, method="fast")
        brute = concordance_counts(scores, times, events, method="brute")
        assert fast == brute


def test_cindex_unknown_method():
    with pytest.raises(ValueError):
        concordance_counts([1.0], [1.0], [1], method="magic")


def test_cindex_shape_mismatch():
    with pytest.raises(DegenerateInputError) as err:
        concordance_counts([1.0, 2.0], [1.0], [1])
    assert err.value.reason == "shape_mismatch"


def simulate_cox(rng, n, k, r0=0.3, censor=1.0):
    s = rng.standard_normal(n)
    u = rng.random(n)
    raw = -np.log(u) / (r0 * np.exp(k * s))
    times = np.minimum(raw, censor)
    events = (raw <= censor).astype(np.int64)
    return s, times, events


def test_calibration_slope_recovers_truth():
    rng = np.random.default_rng(17)
    s, times, events = simulate_cox(rng, 5000, 1.0)
    assert calibration_slope(s, times, events) == pytest.approx(1.0, abs=0.08)


def test_calibration_slope_equivariance():
    rng = np.random.default_rng(18)
    s, times, events = simulate_cox(rng, 2000, 1.0)
    b1 = calibration_slope(s, times, events)
    b2 = calibration_slope(2.0 * s, times, events)
    assert b2 == pytest.approx(b1 / 2.0, abs=1e-6)


def test_calibration_slope_matches_likelihood_maximizer():
    rng = np.random.default_rng(19)
    s, times, events = simulate_cox(rng, 800, 0.8)
    beta = calibration_slope(s, times, events)

    # golden-section search over the partial likelihood as a cross-check
    lo, hi = -5.0, 5.0
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = hi - phi * (hi - lo), lo + phi * (hi - lo)
    fa = cox_partial_loglik(a, s, times, events)
    fb = cox_partial_loglik(b, s, times, events)
    for _ in range(200):
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + phi * (hi - lo)
            fb = cox_partial_loglik(b, s, times, events)
        else:
            hi, b, fb = b, a, fa
            a = hi - phi * (hi - lo)
            fa = cox_partial_loglik(a, s, times, events)
    assert beta == pytest.approx(0.5 * (lo + hi), abs=1e-6)


def test_calibration_slope_breslow_handles_ties():
    # integer-day times force tie blocks through the Breslow aggregation
    rng = np.random.default_rng(20)
    s = rng.standard_normal(1500)
    raw = -np.log(rng.random(1500)) / (0.3 * np.exp(s))
    times = np.ceil(raw * 20).clip(max=30)
    events = (times < 30).astype(np.int64)
    beta = calibration_slope(s, times, events)
    assert beta == pytest.approx(1.0, abs=0.15)


@pytest.mark.parametrize("scores,times,events,reason", [
    ([1.0, 2.0], [1.0, 2.0], [0, 0], "no_events"),
    ([1.0, 2.0, 3.0], [5.0, 5.0, 9.0], [1, 1, 0], "few_event_times"),
    ([2.0, 2.0, 2.0], [1.0, 2.0, 3.0], [1, 1, 0], "constant_scores"),
])
def test_calibration_slope_degenerate_inputs(scores, times, events, reason):
    with pytest.raises(DegenerateInputError) as err:
        calibration_slope(scores, times, events)
    assert err.value.reason == reason
