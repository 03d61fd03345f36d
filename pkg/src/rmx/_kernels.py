"""Hot numeric kernels: concordance pair counting and the audit optimizer.

Each kernel exists as a numba @njit build and a pure-NumPy fallback; the
active variant is chosen once at import from RMX_NUMBA (see _backend).
Pair counts are returned as exact integers (concordant, score-tied,
comparable) so every path can be compared bit-for-bit.

Comparability convention: pair (i, j) counts once, with i the event side,
iff t_i < t_j, or t_i == t_j with j censored. Events tied in time are not
comparable with each other.
"""

import numpy as np

from ._backend import NUMBA_AVAILABLE, NUMBA_ENABLED

if NUMBA_AVAILABLE:
    from numba import njit


# ---------------------------------------------------------------------------
# concordance pair counting

def _cindex_brute_loop(times, events, ranks):
    concordant = 0
    tied = 0
    comparable = 0
    n = times.shape[0]
    for i in range(n):
        if events[i] == 0:
            continue
        ti = times[i]
        ri = ranks[i]
        for j in range(n):
            if j == i:
                continue
            tj = times[j]
            if ti < tj or (ti == tj and events[j] == 0):
                comparable += 1
                rj = ranks[j]
                if ri > rj:
                    concordant += 1
                elif ri == rj:
                    tied += 1
    return concordant, tied, comparable


def cindex_counts_brute_numpy(times, events, ranks):
    """All-pairs counting via one boolean matrix; oracle-sized inputs only."""
    n = times.shape[0]
    if n > 20000:
        raise ValueError("brute-force pair counting is capped at n=20000")
    ev = events == 1
    if not ev.any():
        return 0, 0, 0
    ti = times[ev][:, None]
    ri = ranks[ev][:, None]
    comp = (ti < times[None, :]) | ((ti == times[None, :]) & (events[None, :] == 0))
    concordant = int((comp & (ri > ranks[None, :])).sum())
    tied = int((comp & (ri == ranks[None, :])).sum())
    return concordant, tied, int(comp.sum())


def cindex_counts_fast_numpy(times, events, ranks):
    """Event-row chunked broadcasting, O(events * n) work, bounded memory."""
    n = times.shape[0]
    ev_idx = np.flatnonzero(events == 1)
    if ev_idx.size == 0:
        return 0, 0, 0
    concordant = 0
    tied = 0
    comparable = 0
    chunk = max(1, 4_000_000 // max(1, n))
    for s in range(0, ev_idx.size, chunk):
        idx = ev_idx[s:s + chunk]
        ti = times[idx][:, None]
        ri = ranks[idx][:, None]
        comp = (ti < times[None, :]) | ((ti == times[None, :]) & (events[None, :] == 0))
        concordant += int((comp & (ri > ranks[None, :])).sum())
        tied += int((comp & (ri == ranks[None, :])).sum())
        comparable += int(comp.sum())
    return concordant, tied, comparable


def _cindex_fast_loop(order, times, events, ranks, n_ranks):
    # Fenwick tree over score ranks of already-seen events, walked in time
    # order; same-time event/censored pairs handled inside each time block.
    n = order.shape[0]
    tree = np.zeros(n_ranks + 1, np.int64)
    in_tree = 0
    concordant = 0
    tied = 0
    comparable = 0
    i = 0
    while i < n:
        t0 = times[order[i]]
        j = i
        while j < n and times[order[j]] == t0:
            j += 1
        if in_tree > 0:
            for k in range(i, j):
                r = ranks[order[k]]
                le = 0
                p = r + 1
                while p > 0:
                    le += tree[p]
                    p -= p & (-p)
                lt = 0
                p = r
                while p > 0:
                    lt += tree[p]
                    p -= p & (-p)
                concordant += in_tree - le
                tied += le - lt
                comparable += in_tree
        n_ev = 0
        for k in range(i, j):
            if events[order[k]] == 1:
                n_ev += 1
        if 0 < n_ev < j - i:
            ev_ranks = np.empty(n_ev, np.int64)
            m = 0
            for k in range(i, j):
                if events[order[k]] == 1:
                    ev_ranks[m] = ranks[order[k]]
                    m += 1
            ev_ranks.sort()
            for k in range(i, j):
                if events[order[k]] == 0:
                    rc = ranks[order[k]]
                    hi = np.searchsorted(ev_ranks, rc, side="right")
                    lo = np.searchsorted(ev_ranks, rc, side="left")
                    concordant += n_ev - hi
                    tied += hi - lo
                    comparable += n_ev
        for k in range(i, j):
            if events[order[k]] == 1:
                p = ranks[order[k]] + 1
                while p <= n_ranks:
                    tree[p] += 1
                    p += p & (-p)
                in_tree += 1
        i = j
    return concordant, tied, comparable


# ---------------------------------------------------------------------------
# individual-fairness audit: projected gradient with step halving

def _audit_one_impl(z0, y1, w, lo, hi, basis, lam, score_const, ln_c, bias,
                    step0, max_iters, move_tol):
    # Minimizes sign*p(u) + lam*d(z0,u) over the box, sign=+1 for a high-risk
    # start and -1 otherwise. Each iteration takes a gradient step on the
    # smooth risk term, then the exact proximal shrinkage of the distance
    # term (soft-threshold of the component orthogonal to the sensitive
    # basis), then clips to the box; only strictly decreasing steps are
    # accepted, so the recorded objective history is monotone. A plain
    # subgradient step stalls at the d=0 kink, the prox step does not.
    sign = 1.0 if y1 == 1 else -1.0
    d_dim = z0.shape[0]
    u = z0.copy()
    s = score_const + np.dot(w, u)
    p = -np.expm1(np.exp(s - bias) * ln_c)
    f_cur = sign * p
    hist = np.empty(max_iters + 1)
    hist[0] = f_cur
    used = 1
    for _ in range(max_iters):
        s = score_const + np.dot(w, u)
        q = np.exp(s - bias)
        dpds = -ln_c * q * np.exp(q * ln_c)
        g = (sign * dpds) * w
        step = step0
        accepted = False
        cand = u
        f_new = f_cur
        for _h in range(60):
            v = u - step * g
            c = v - z0
            cb = np.dot(basis.T, c)
            c_sub = np.dot(basis, cb)
            c_perp = c - c_sub
            nperp = np.sqrt(np.dot(c_perp, c_perp))
            if nperp > step * lam:
                trial = z0 + c_sub + (1.0 - step * lam / nperp) * c_perp
            else:
                trial = z0 + c_sub
            for k in range(d_dim):
                if trial[k] < lo[k]:
                    trial[k] = lo[k]
                elif trial[k] > hi[k]:
                    trial[k] = hi[k]
            s2 = score_const + np.dot(w, trial)
            p2 = -np.expm1(np.exp(s2 - bias) * ln_c)
            dd = trial - z0
            pj = np.dot(basis.T, dd)
            d2b = np.dot(dd, dd) - np.dot(pj, pj)
            db = np.sqrt(d2b) if d2b > 0.0 else 0.0
            f_new = sign * p2 + lam * db
            if f_new < f_cur - 1e-15:
                cand = trial
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        move = 0.0
        for k in range(d_dim):
            dk = cand[k] - u[k]
            move += dk * dk
        move = np.sqrt(move)
        u = cand
        f_cur = f_new
        hist[used] = f_cur
        used += 1
        if move < move_tol:
            break
    return u, hist, used


def _make_audit_batch(one):
    def _audit_batch(Z, labels, w, lo, hi, basis, lam, score_const, ln_c,
                     bias, step0, max_iters, move_tol):
        n = Z.shape[0]
        U = np.empty_like(Z)
        for i in range(n):
            u, _hist, _used = one(Z[i], labels[i], w, lo, hi, basis, lam,
                                  score_const, ln_c, bias, step0, max_iters,
                                  move_tol)
            U[i] = u
        return U
    return _audit_batch


# ---------------------------------------------------------------------------
# variant table

audit_one_numpy = _audit_one_impl
audit_batch_numpy = _make_audit_batch(_audit_one_impl)
cindex_counts_brute_numba = None
cindex_counts_fast_numba = None
audit_one_numba = None
audit_batch_numba = None

if NUMBA_AVAILABLE:
    _cindex_brute_numba = njit(cache=True)(_cindex_brute_loop)
    _cindex_fast_numba = njit(cache=True)(_cindex_fast_loop)
    audit_one_numba = njit(cache=True)(_audit_one_impl)
    audit_batch_numba = njit(cache=False)(_make_audit_batch(audit_one_numba))

    def cindex_counts_brute_numba(times, events, ranks):
        c, t, m = _cindex_brute_numba(times, events, ranks)
        return int(c), int(t), int(m)

    def cindex_counts_fast_numba(times, events, ranks):
        n_ranks = int(ranks.max()) + 1 if ranks.size else 0
        order = np.argsort(times, kind="stable").astype(np.int64)
        c, t, m = _cindex_fast_numba(order, times, events, ranks, n_ranks)
        return int(c), int(t), int(m)


if NUMBA_ENABLED:
    cindex_counts_brute = cindex_counts_brute_numba
    cindex_counts_fast = cindex_counts_fast_numba
    audit_batch = audit_batch_numba
    audit_one = audit_one_numba
else:
    cindex_counts_brute = cindex_counts_brute_numpy
    cindex_counts_fast = cindex_counts_fast_numpy
    audit_batch = audit_batch_numpy
    audit_one = audit_one_numpy
