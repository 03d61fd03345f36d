#!/usr/bin/env python3
"""Compare the numba and pure-NumPy builds of the hot kernels.

Both variants ship in rmx._kernels; production picks one at import from
RMX_NUMBA, while this script times the two side by side in one process.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --n-cindex 50000 --repeats 7
"""

import argparse
import math
import timeit

import numpy as np

from rmx import _kernels
from rmx._backend import NUMBA_AVAILABLE


def best_of(fn, repeats):
    fn()    # warm the JIT cache before timing
    return min(timeit.Timer(fn).repeat(repeats, number=1))


def cindex_case(n, seed=0):
    rng = np.random.default_rng(seed)
    scores = rng.integers(0, 1000, n).astype(np.float64)
    times = rng.integers(1, 1827, n).astype(np.float64)
    events = (rng.random(n) < 0.3).astype(np.int64)
    ranks = np.unique(scores, return_inverse=True)[1].astype(np.int64)
    return times, events, ranks


def audit_case(n, dims=19, seed=0):
    rng = np.random.default_rng(seed)
    lo = np.full(dims, -3.0)
    hi = np.full(dims, 3.0)
    Z = np.clip(rng.standard_normal((n, dims)), lo, hi)
    direction = rng.standard_normal(dims)
    basis = (direction / np.linalg.norm(direction))[:, None]
    w = rng.standard_normal(dims)
    score_const, ln_c, bias = 7.0, math.log(0.971), 6.454
    risks = -np.expm1(np.exp(score_const + Z @ w - bias) * ln_c)
    labels = (risks >= 0.05).astype(np.int64)
    return (Z, labels, w, lo, hi, basis, 1.0, score_const, ln_c, bias,
            0.1, 500, 1e-8)


def report(name, numpy_s, numba_s):
    speedup = numpy_s / numba_s if numba_s > 0 else float("inf")
    print(f"{name:<28} {numpy_s * 1e3:>10.1f} ms {numba_s * 1e3:>10.1f} ms "
          f"{speedup:>7.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-cindex", type=int, default=20_000)
    parser.add_argument("--n-audit", type=int, default=2_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':<28} {'numpy':>13} {'numba':>13} {'speedup':>8}")

    times, events, ranks = cindex_case(args.n_cindex)
    assert (_kernels.cindex_counts_fast_numpy(times, events, ranks)
            == _kernels.cindex_counts_fast_numba(times, events, ranks))
    report(f"cindex fast (n={args.n_cindex})",
           best_of(lambda: _kernels.cindex_counts_fast_numpy(times, events, ranks),
                   args.repeats),
           best_of(lambda: _kernels.cindex_counts_fast_numba(times, events, ranks),
                   args.repeats))

    n_brute = min(args.n_cindex, 4_000)
    times, events, ranks = cindex_case(n_brute)
    report(f"cindex brute (n={n_brute})",
           best_of(lambda: _kernels.cindex_counts_brute_numpy(times, events, ranks),
                   args.repeats),
           best_of(lambda: _kernels.cindex_counts_brute_numba(times, events, ranks),
                   args.repeats))

    case = audit_case(args.n_audit)
    U_np = _kernels.audit_batch_numpy(*case)
    U_nb = _kernels.audit_batch_numba(*case)
    # A one-ulp libm difference can flip a line-search accept and let the
    # two optimizer paths diverge to different near-optimal points, so the
    # iterates only agree to optimizer tolerance. The flip decisions match.
    labels, w = case[1], case[2]
    score_const, ln_c, bias = case[7], case[8], case[9]

    def flips(U):
        risks = -np.expm1(np.exp(score_const + U @ w - bias) * ln_c)
        return (risks >= 0.05).astype(np.int64) != labels

    assert np.array_equal(flips(U_np), flips(U_nb))
    np.testing.assert_allclose(U_np, U_nb, rtol=0, atol=1e-3)
    report(f"audit batch (n={args.n_audit})",
           best_of(lambda: _kernels.audit_batch_numpy(*case), args.repeats),
           best_of(lambda: _kernels.audit_batch_numba(*case), args.repeats))


if __name__ == "__main__":
    main()
