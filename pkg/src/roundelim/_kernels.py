"""Numeric inner loops.

Every kernel exists twice: a plain loop body that numba compiles, and an
equivalent vectorized numpy version. ``USE_NUMBA`` picks which one the rest
of the package calls; set ``ROUNDELIM_DISABLE_NUMBA=1`` to force numpy.
Both paths are deterministic and take only pre-drawn random numbers, so they
return identical results (for ``girth`` the length agrees; the witness edge
may differ). The numpy girth keeps n x n BFS tables and is meant for graphs
of a few thousand nodes at most.
"""

from __future__ import annotations

import os

import numpy as np

DISABLE_ENV = "ROUNDELIM_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get(DISABLE_ENV, "").lower() not in {"1", "true", "yes", "on"}


def _jit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# Poisson-binomial pmf


def _pb_pmf_loop(y):
    m = y.shape[0]
    pmf = np.zeros(m + 1)
    pmf[0] = 1.0
    for i in range(m):
        p = y[i]
        for k in range(i + 1, 0, -1):
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p
        pmf[0] = pmf[0] * (1.0 - p)
    return pmf


def _pb_pmf_numpy(y):
    pmf = np.zeros(y.shape[0] + 1)
    pmf[0] = 1.0
    for i, p in enumerate(y):
        pmf[1 : i + 2] = pmf[1 : i + 2] * (1.0 - p) + pmf[: i + 1] * p
        pmf[0] *= 1.0 - p
    return pmf


# ---------------------------------------------------------------------------
# E|sum x_i eps_i| over all sign vectors


def _mean_abs_signed_sum_loop(x):
    # Gray-code walk: one sign flips per step
    n = x.shape[0]
    s = 0.0
    for i in range(n):
        s -= x[i]
    total = abs(s)
    count = 1 << n
    signs = np.zeros(n, dtype=np.bool_)
    for step in range(1, count):
        i = 0
        while not (step >> i) & 1:
            i += 1
        if signs[i]:
            s -= 2.0 * x[i]
        else:
            s += 2.0 * x[i]
        signs[i] = not signs[i]
        total += abs(s)
    return total / count


def _mean_abs_signed_sum_numpy(x):
    n = x.shape[0]
    # sum over sign vectors built half by half: |a + b| for all pairs
    h = n // 2
    lo, hi = x[:h], x[h:]

    def all_sums(v):
        sums = np.zeros(1)
        for value in v:
            sums = np.concatenate((sums - value, sums + value))
        return sums

    a = all_sums(lo)
    b = all_sums(hi)
    total = 0.0
    step = max(1, (1 << 20) // max(1, a.shape[0]))
    for start in range(0, b.shape[0], step):
        total += np.abs(a[:, None] + b[None, start : start + step]).sum()
    return total / (a.shape[0] * b.shape[0])


# ---------------------------------------------------------------------------
# sum_i min(x_i, 1 - x_i) - (sum of all but the b largest), per row


def _min_sum_margins_loop(X, b):
    m, d = X.shape
    out = np.empty(m)
    top = np.empty(max(b, 1))
    for r in range(m):
        lhs = 0.0
        total = 0.0
        k = 0
        for i in range(d):
            v = X[r, i]
            lhs += min(v, 1.0 - v)
            total += v
            # keep the b largest values seen so far, sorted descending
            if k < b:
                j = k
                k += 1
            elif b > 0 and v > top[b - 1]:
                j = b - 1
            else:
                continue
            while j > 0 and top[j - 1] < v:
                top[j] = top[j - 1]
                j -= 1
            top[j] = v
        best = 0.0
        for j in range(k):
            best += top[j]
        out[r] = lhs - (total - best)
    return out


def _min_sum_margins_numpy(X, b):
    srt = -np.sort(-X, axis=1)
    lhs = np.minimum(X, 1.0 - X).sum(axis=1)
    rest = srt[:, b:].sum(axis=1)
    return lhs - rest


# ---------------------------------------------------------------------------
# zero-round grabbing: matched edges per trial


def _zero_round_matches_loop(sel, perms, nbr, rev):
    # sel: (trials, n, b) local labels; perms: (trials, n, d) graph port -> local label
    trials, n, b = sel.shape
    d = nbr.shape[1]
    out = np.zeros(trials, dtype=np.int64)
    grab = np.zeros((n, d), dtype=np.bool_)
    mark = np.zeros(d, dtype=np.bool_)
    for t in range(trials):
        for v in range(n):
            for s in range(b):
                mark[sel[t, v, s]] = True
            for i in range(d):
                grab[v, i] = mark[perms[t, v, i]]
            for s in range(b):
                mark[sel[t, v, s]] = False
        cnt = 0
        for v in range(n):
            for i in range(d):
                u = nbr[v, i]
                if u > v and grab[v, i] and grab[u, rev[v, i]]:
                    cnt += 1
        out[t] = cnt
    return out


def _zero_round_matches_numpy(sel, perms, nbr, rev):
    trials, n, b = sel.shape
    # grab[t, v, i] = perms[t, v, i] in sel[t, v, :]
    grab = (perms[:, :, :, None] == sel[:, :, None, :]).any(axis=3)
    other = grab[:, nbr, rev]
    upper = nbr > np.arange(n)[:, None]
    return (grab & other & upper[None]).sum(axis=(1, 2)).astype(np.int64)


# ---------------------------------------------------------------------------
# girth by BFS from every node; returns (length, root, u, w) or (-1, ...)


def _girth_loop(nbr):
    n, d = nbr.shape
    best = -1
    best_root = -1
    best_u = -1
    best_w = -1
    dist = np.empty(n, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for r in range(n):
        for i in range(n):
            dist[i] = -1
            parent[i] = -1
        dist[r] = 0
        head = 0
        tail = 1
        queue[0] = r
        while head < tail:
            x = queue[head]
            head += 1
            if best != -1 and 2 * dist[x] + 1 >= best:
                break
            for i in range(d):
                y = nbr[x, i]
                if y < 0:
                    continue
                if dist[y] == -1:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue[tail] = y
                    tail += 1
                elif y != parent[x] and x != parent[y]:
                    length = dist[x] + dist[y] + 1
                    if best == -1 or length < best:
                        best = length
                        best_root = r
                        best_u = x
                        best_w = y
    return best, best_root, best_u, best_w


def _girth_numpy(nbr):
    # frontier-at-a-time BFS from all roots simultaneously
    n, d = nbr.shape
    best = -1
    best_root = best_u = best_w = -1
    valid = nbr >= 0
    safe = np.where(valid, nbr, 0)
    dist = np.full((n, n), -1, dtype=np.int64)
    parent = np.full((n, n), -1, dtype=np.int64)
    roots = np.arange(n)
    dist[roots, roots] = 0
    level = 0
    frontier = np.eye(n, dtype=bool)
    while frontier.any():
        if best != -1 and 2 * level + 1 >= best:
            break
        rs, xs = np.nonzero(frontier)
        ys = safe[xs]  # (k, d)
        ok = valid[xs]
        rr = np.repeat(rs[:, None], d, axis=1)
        xx = np.repeat(xs[:, None], d, axis=1)
        dy = dist[rr, ys]
        px = parent[rs, xs][:, None]
        py = parent[rr, ys]
        closing = ok & (dy >= 0) & (ys != px) & (py != xx)
        if closing.any():
            lengths = np.where(closing, level + dy + 1, np.iinfo(np.int64).max)
            # order candidates the same way the loop version visits them
            order = np.lexsort((np.arange(lengths.size), lengths.ravel()))
            k = order[0]
            cand = int(lengths.ravel()[k])
            if best == -1 or cand < best:
                best = cand
                best_root = int(rr.ravel()[k])
                best_u = int(xx.ravel()[k])
                best_w = int(ys.ravel()[k])
        new = ok & (dy < 0)
        new_frontier = np.zeros_like(frontier)
        rn, yn, xn = rr[new], ys[new], xx[new]
        # first discoverer wins, matching queue order
        first = np.unique(rn * n + yn, return_index=True)[1]
        rn, yn, xn = rn[first], yn[first], xn[first]
        dist[rn, yn] = level + 1
        parent[rn, yn] = xn
        new_frontier[rn, yn] = True
        frontier = new_frontier
        level += 1
    return best, best_root, best_u, best_w


# ---------------------------------------------------------------------------
# edge classes of a grabbing labeling: (MM, MU, UU)


def _edge_classes_loop(labels, nbr, rev):
    n, d = nbr.shape
    mm = 0
    mu = 0
    uu = 0
    for v in range(n):
        for i in range(d):
            u = nbr[v, i]
            if u > v:
                a = labels[v, i] == 1
                c = labels[u, rev[v, i]] == 1
                if a and c:
                    mm += 1
                elif a or c:
                    mu += 1
                else:
                    uu += 1
    return mm, mu, uu


def _edge_classes_numpy(labels, nbr, rev):
    n = nbr.shape[0]
    upper = nbr > np.arange(n)[:, None]
    a = labels == 1
    c = labels[np.where(upper, nbr, 0), np.where(upper, rev, 0)] == 1
    mm = int((a & c & upper).sum())
    mu = int(((a ^ c) & upper).sum())
    uu = int((~a & ~c & upper).sum())
    return mm, mu, uu


KERNELS = {
    "pb_pmf": (_pb_pmf_loop, _pb_pmf_numpy),
    "mean_abs_signed_sum": (_mean_abs_signed_sum_loop, _mean_abs_signed_sum_numpy),
    "min_sum_margins": (_min_sum_margins_loop, _min_sum_margins_numpy),
    "zero_round_matches": (_zero_round_matches_loop, _zero_round_matches_numpy),
    "girth": (_girth_loop, _girth_numpy),
    "edge_classes": (_edge_classes_loop, _edge_classes_numpy),
}

numba_impl = {name: _jit(loop) for name, (loop, _) in KERNELS.items()}
numpy_impl = {name: vec for name, (_, vec) in KERNELS.items()}
_active = numba_impl if USE_NUMBA else numpy_impl


def pb_pmf(y: np.ndarray) -> np.ndarray:
    return _active["pb_pmf"](np.ascontiguousarray(y, dtype=np.float64))


def mean_abs_signed_sum(x: np.ndarray) -> float:
    return float(_active["mean_abs_signed_sum"](np.ascontiguousarray(x, dtype=np.float64)))


def min_sum_margins(X: np.ndarray, b: int) -> np.ndarray:
    return _active["min_sum_margins"](np.ascontiguousarray(X, dtype=np.float64), int(b))


def zero_round_matches(sel, perms, nbr, rev) -> np.ndarray:
    return _active["zero_round_matches"](
        np.ascontiguousarray(sel, dtype=np.int64),
        np.ascontiguousarray(perms, dtype=np.int64),
        np.ascontiguousarray(nbr, dtype=np.int64),
        np.ascontiguousarray(rev, dtype=np.int64),
    )


def girth(nbr: np.ndarray) -> tuple[int, int, int, int]:
    res = _active["girth"](np.ascontiguousarray(nbr, dtype=np.int64))
    return tuple(int(v) for v in res)


def edge_classes(labels, nbr, rev) -> tuple[int, int, int]:
    res = _active["edge_classes"](
        np.ascontiguousarray(labels, dtype=np.int64),
        np.ascontiguousarray(nbr, dtype=np.int64),
        np.ascontiguousarray(rev, dtype=np.int64),
    )
    return tuple(int(v) for v in res)
