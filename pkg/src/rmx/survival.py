"""Survival statistics: Kaplan-Meier curves, Harrell's concordance index
under censoring, and calibration slope by Cox partial-likelihood refit.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DegenerateInputError


@dataclass(frozen=True)
class KMCurve:
    times: np.ndarray     # distinct event times, strictly increasing
    survival: np.ndarray  # S(t) after each time
    at_risk: np.ndarray
    events: np.ndarray

    def to_json(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "survival": [float(s) for s in self.survival],
            "at_risk": [int(r) for r in self.at_risk],
            "events": [int(d) for d in self.events],
        }

    def survival_at(self, t: float) -> float:
        idx = int(np.searchsorted(self.times, t, side="right"))
        return 1.0 if idx == 0 else float(self.survival[idx - 1])


@dataclass(frozen=True)
class PerformanceSummary:
    c_index: float | None
    calibration_slope: float | None
    km: KMCurve
    n: int
    events: int
    flags: tuple[str, ...] = ()


def _as_arrays(scores, times, events):
    scores = np.ascontiguousarray(scores, np.float64)
    times = np.ascontiguousarray(times, np.float64)
    events = np.ascontiguousarray(events, np.int64)
    if not scores.shape == times.shape == events.shape:
        raise DegenerateInputError("input vectors differ in length", "shape_mismatch")
    return scores, times, events


def km_fit(times, events, horizon_days=None) -> KMCurve:
    """Product-limit estimator over distinct event times, optionally
    truncated at a display horizon."""
    times = np.ascontiguousarray(times, np.float64)
    events = np.ascontiguousarray(events, np.int64)
    if times.size == 0:
        raise DegenerateInputError("empty input", "empty")
    order = np.argsort(times, kind="stable")
    t_sorted = times[order]
    e_sorted = events[order]
    ev_times = t_sorted[e_sorted == 1]
    distinct, counts = np.unique(ev_times, return_counts=True)
    if horizon_days is not None:
        keep = distinct <= horizon_days
        distinct, counts = distinct[keep], counts[keep]
    n = times.size
    at_risk = n - np.searchsorted(t_sorted, distinct, side="left")
    survival = np.cumprod(1.0 - counts / at_risk)
    return KMCurve(distinct, survival, at_risk, counts)


def concordance_counts(scores, times, events, method="fast"):
    """Exact (concordant, score-tied, comparable) pair counts.

    `method` picks the production path ("fast") or the all-pairs reference
    ("brute"); both return identical integers on the same input.
    """
    scores, times, events = _as_arrays(scores, times, events)
    ranks = np.unique(scores, return_inverse=True)[1].astype(np.int64)
    if method == "fast":
        return _kernels.cindex_counts_fast(times, events, ranks)
    if method == "brute":
        return _kernels.cindex_counts_brute(times, events, ranks)
    raise ValueError(f"unknown method {method!r}")


def c_index(scores, times, events) -> float:
    """(concordant + tied/2) / comparable over censoring-comparable pairs."""
    concordant, tied, comparable = concordance_counts(scores, times, events)
    if comparable == 0:
        raise DegenerateInputError("no comparable pairs", "no_comparable_pairs")
    return (concordant + 0.5 * tied) / comparable


def _cox_stats(beta, x, block_start, event_idx):
    # Breslow partial likelihood on time-sorted data; suffix sums give the
    # risk-set aggregates, block_start maps each event to its tie block.
    w = np.exp(beta * x)
    s0 = np.cumsum(w[::-1])[::-1]
    s1 = np.cumsum((w * x)[::-1])[::-1]
    s2 = np.cumsum((w * x * x)[::-1])[::-1]
    starts = block_start[event_idx]
    d0 = s0[starts]
    m1 = s1[starts] / d0
    ll = float(np.sum(beta * x[event_idx] - np.log(d0)))
    grad = float(np.sum(x[event_idx] - m1))
    info = float(np.sum(s2[starts] / d0 - m1 * m1))
    return ll, grad, info


def cox_partial_loglik(beta, scores, times, events) -> float:
    """Breslow partial log-likelihood of a single-covariate Cox model,
    exposed so independent 1-D maximizers can cross-check the Newton fit."""
    scores, times, events = _as_arrays(scores, times, events)
    order = np.argsort(times, kind="stable")
    x = scores[order] - scores.mean()
    t = times[order]
    block_start = np.searchsorted(t, t, side="left")
    event_idx = np.flatnonzero(events[order] == 1)
    return _cox_stats(beta, x, block_start, event_idx)[0]


def calibration_slope(scores, times, events, tol=1e-8, max_iters=50) -> float:
    """Coefficient of a univariate Cox refit on the model's linear predictor;
    1 is ideal, below 1 means risk overestimation, above 1 underestimation."""
    scores, times, events = _as_arrays(scores, times, events)
    if events.sum() == 0:
        raise DegenerateInputError("no events", "no_events")
    if np.unique(times[events == 1]).size < 2:
        raise DegenerateInputError("fewer than two distinct event times", "few_event_times")
    if np.all(scores == scores[0]):
        raise DegenerateInputError("constant scores", "constant_scores")

    order = np.argsort(times, kind="stable")
    x = scores[order] - scores.mean()
    t = times[order]
    block_start = np.searchsorted(t, t, side="left")
    event_idx = np.flatnonzero(events[order] == 1)

    beta = 0.0
    ll, grad, info = _cox_stats(beta, x, block_start, event_idx)
    for _ in range(max_iters):
        if info <= 0:
            raise DegenerateInputError("non-positive observed information", "singular_information")
        delta = grad / info
        # step halving keeps the likelihood ascent monotone
        step = 1.0
        for _h in range(40):
            trial = beta + step * delta
            ll_new, grad_new, info_new = _cox_stats(trial, x, block_start, event_idx)
            if ll_new >= ll or abs(step * delta) < tol:
                break
            step *= 0.5
        beta, ll, grad, info = trial, ll_new, grad_new, info_new
        if abs(step * delta) <= tol:
            return float(beta)
    raise ConvergenceError(f"Cox refit did not converge in {max_iters} iterations")
