"""Greedy packing kernels.

The first-fit greedy over a seeded candidate order is the workhorse of
the separated-set estimator.  States are rows of an integer index array
pointing into a shared 1D grid of lift coordinates; the pairwise dynamic
distance is evaluated through three layers:

* an upper bound from the per-grid dynamic distance matrix ``D`` (the
  coordinatewise matching in lift coordinates dominates the true
  Hausdorff distance, so ``bound < eps`` proves two states close);
* the honest state distance at time 0 (``>= eps`` proves them separated);
* a full scan over the time window for the remaining ambiguous pairs.

For interval-product states the bound *is* the metric and the honest
layers are skipped.  Kernels are numba-compiled when available, with a
plain Python mirror used as a fallback and as a cross-check in tests.

metric codes: 0 = interval product (L-inf exact), 1 = finite sets on the
interval, 2 = finite sets on the circle, 3 = circle arcs.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


LINF_PRODUCT = 0
FINITE_INTERVAL = 1
FINITE_CIRCLE = 2
CIRCLE_ARC = 3


@njit(cache=True, nogil=True)
def _circle_dist(u, v):
    d = abs(u - v) % 1.0
    return d if d <= 0.5 else 1.0 - d


@njit(cache=True, nogil=True)
def _finite_dh(a, b, circle):
    """Hausdorff distance between the point sets a and b (padded tuples)."""
    k = a.shape[0]
    dmax = 0.0
    for i in range(k):
        best = 2.0
        for j in range(k):
            d = _circle_dist(a[i], b[j]) if circle else abs(a[i] - b[j])
            if d < best:
                best = d
        if best > dmax:
            dmax = best
    for j in range(k):
        best = 2.0
        for i in range(k):
            d = _circle_dist(a[i], b[j]) if circle else abs(a[i] - b[j])
            if d < best:
                best = d
        if best > dmax:
            dmax = best
    return dmax


@njit(cache=True, nogil=True)
def _arc_point_dist(x, s, length):
    t = (x - s) % 1.0
    if t <= length:
        return 0.0
    d1 = _circle_dist(x, s)
    d2 = _circle_dist(x, s + length)
    return d1 if d1 < d2 else d2


@njit(cache=True, nogil=True)
def _arc_directed(s1, l1, s2, l2):
    gap = 1.0 - l2
    if l1 >= 1.0:
        return gap * 0.5
    d = _arc_point_dist(s1 % 1.0, s2 % 1.0, l2)
    d2 = _arc_point_dist((s1 + l1) % 1.0, s2 % 1.0, l2)
    if d2 > d:
        d = d2
    mid = (s2 + l2 + gap * 0.5) % 1.0
    if ((mid - s1) % 1.0) <= l1 and gap * 0.5 > d:
        d = gap * 0.5
    return d


@njit(cache=True, nogil=True)
def _arc_dh(s1, l1, s2, l2):
    if l1 > 1.0:
        l1 = 1.0
    if l2 > 1.0:
        l2 = 1.0
    a = _arc_directed(s1, l1, s2, l2)
    b = _arc_directed(s2, l2, s1, l1)
    return a if a > b else b


@njit(cache=True, nogil=True)
def _state_dist(idx, orbit, c, w, t, code, buf_a, buf_b):
    """Honest distance between cloud states c and w at orbit time t."""
    k = idx.shape[1]
    if code == CIRCLE_ARC:
        s1 = orbit[idx[c, 0], t]
        l1 = orbit[idx[c, 1], t] - s1
        s2 = orbit[idx[w, 0], t]
        l2 = orbit[idx[w, 1], t] - s2
        return _arc_dh(s1, l1, s2, l2)
    for a in range(k):
        buf_a[a] = orbit[idx[c, a], t]
        buf_b[a] = orbit[idx[w, a], t]
    return _finite_dh(buf_a, buf_b, code == FINITE_CIRCLE)


@njit(cache=True, nogil=True)
def greedy_pack(idx, order, carry, D, orbit, n, eps, code):
    """First-fit greedy packing; returns witnesses in insertion order.

    idx:   (N, k) grid indices per state
    order: candidate scan order (cloud positions)
    carry: witnesses inherited from a smaller window, in insertion order
    D:     per-grid dynamic distance matrix for this window (lift metric)
    orbit: (M, >=n) lift orbit of the grid
    """
    N, k = idx.shape
    is_w = np.zeros(N, np.bool_)
    wl = np.empty(N, np.int64)
    nw = 0
    for i in range(carry.shape[0]):
        wl[nw] = carry[i]
        is_w[carry[i]] = True
        nw += 1
    buf_a = np.empty(k, np.float64)
    buf_b = np.empty(k, np.float64)
    for oi in range(N):
        c = order[oi]
        if is_w[c]:
            continue
        ok = True
        for wi in range(nw - 1, -1, -1):
            w = wl[wi]
            bound = 0.0
            for a in range(k):
                v = D[idx[c, a], idx[w, a]]
                if v > bound:
                    bound = v
            if bound < eps:
                ok = False
                break
            if code == LINF_PRODUCT:
                continue
            if code == FINITE_INTERVAL:
                # the extreme coordinates evolve as the set's min and max,
                # so their dynamic gaps bound the Hausdorff metric below
                lb = D[idx[c, 0], idx[w, 0]]
                v = D[idx[c, k - 1], idx[w, k - 1]]
                if v > lb:
                    lb = v
                if lb >= eps:
                    continue
            if _state_dist(idx, orbit, c, w, 0, code, buf_a, buf_b) >= eps:
                continue
            dmax = 0.0
            for t in range(n):
                d = _state_dist(idx, orbit, c, w, t, code, buf_a, buf_b)
                if d > dmax:
                    dmax = d
                    if dmax >= eps:
                        break
            if dmax < eps:
                ok = False
                break
        if ok:
            wl[nw] = c
            is_w[c] = True
            nw += 1
    return wl[:nw].copy()


@njit(cache=True, nogil=True)
def greedy_base(order, carry, orbit, n, eps, circle):
    """First-fit greedy for 1D base systems; orbit rows are the states."""
    N = orbit.shape[0]
    is_w = np.zeros(N, np.bool_)
    wl = np.empty(N, np.int64)
    nw = 0
    for i in range(carry.shape[0]):
        wl[nw] = carry[i]
        is_w[carry[i]] = True
        nw += 1
    for oi in range(N):
        c = order[oi]
        if is_w[c]:
            continue
        ok = True
        for wi in range(nw - 1, -1, -1):
            w = wl[wi]
            d0 = _circle_dist(orbit[c, 0], orbit[w, 0]) if circle \
                else abs(orbit[c, 0] - orbit[w, 0])
            if d0 >= eps:
                continue
            dmax = d0
            for t in range(1, n):
                d = _circle_dist(orbit[c, t], orbit[w, t]) if circle \
                    else abs(orbit[c, t] - orbit[w, t])
                if d > dmax:
                    dmax = d
                    if dmax >= eps:
                        break
            if dmax < eps:
                ok = False
                break
        if ok:
            wl[nw] = c
            is_w[c] = True
            nw += 1
    return wl[:nw].copy()


@njit(cache=True, nogil=True)
def pair_dyn_dist(idx, orbit, c, w, n, code):
    """Exact dynamic distance between two states over the window n."""
    k = idx.shape[1]
    buf_a = np.empty(k, np.float64)
    buf_b = np.empty(k, np.float64)
    dmax = 0.0
    for t in range(n):
        d = _state_dist(idx, orbit, c, w, t, code, buf_a, buf_b)
        if d > dmax:
            dmax = d
    return dmax


@njit(cache=True, nogil=True)
def pair_dyn_dist_base(orbit, c, w, n, circle):
    dmax = 0.0
    for t in range(n):
        d = _circle_dist(orbit[c, t], orbit[w, t]) if circle \
            else abs(orbit[c, t] - orbit[w, t])
        if d > dmax:
            dmax = d
    return dmax


# -- plain Python mirrors (fallback and cross-check) ---------------------------


def _state_dist_py(idx, orbit, c, w, t, code):
    if code == CIRCLE_ARC:
        s1 = orbit[idx[c, 0], t]
        l1 = orbit[idx[c, 1], t] - s1
        s2 = orbit[idx[w, 0], t]
        l2 = orbit[idx[w, 1], t] - s2
        from .hyperspace import arc_hausdorff

        return float(arc_hausdorff(s1, min(l1, 1.0), s2, min(l2, 1.0)))
    a = orbit[idx[c], t]
    b = orbit[idx[w], t]
    circle = code == FINITE_CIRCLE
    if circle:
        d = np.abs(a[:, None] - b[None, :]) % 1.0
        d = np.minimum(d, 1.0 - d)
    else:
        d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def greedy_pack_py(idx, order, carry, D, orbit, n, eps, code):
    N, k = idx.shape
    is_w = np.zeros(N, bool)
    wl = list(carry)
    for w in carry:
        is_w[w] = True
    for c in order:
        if is_w[c]:
            continue
        ok = True
        for w in reversed(wl):
            bound = float(D[idx[c], idx[w]].max())
            if bound < eps:
                ok = False
                break
            if code == LINF_PRODUCT:
                continue
            if code == FINITE_INTERVAL:
                lb = max(D[idx[c, 0], idx[w, 0]], D[idx[c, -1], idx[w, -1]])
                if lb >= eps:
                    continue
            if _state_dist_py(idx, orbit, c, w, 0, code) >= eps:
                continue
            dmax = max(_state_dist_py(idx, orbit, c, w, t, code) for t in range(n))
            if dmax < eps:
                ok = False
                break
        if ok:
            wl.append(int(c))
            is_w[c] = True
    return np.array(wl, dtype=np.int64)


def greedy_base_py(order, carry, orbit, n, eps, circle):
    def dist(u, v):
        d = np.abs(u - v)
        return np.minimum(d % 1.0, 1.0 - d % 1.0) if circle else d

    wl = list(carry)
    is_w = np.zeros(orbit.shape[0], bool)
    for w in carry:
        is_w[w] = True
    for c in order:
        if is_w[c]:
            continue
        ok = True
        for w in wl:
            if float(dist(orbit[c, :n], orbit[w, :n]).max()) < eps:
                ok = False
                break
        if ok:
            wl.append(int(c))
            is_w[c] = True
    return np.array(wl, dtype=np.int64)
