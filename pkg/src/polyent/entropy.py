"""Polynomial entropy estimation from separated-set counting.

The estimator works on a finite cloud of states: a greedy first-fit pass
over a seeded candidate order extracts a maximal (n, eps)-separated
subset under the dynamic metric d_n(x, y) = max_{t<n} d(f^t x, f^t y).
Witnesses carry forward from window n to the next, so counts are
non-decreasing in n by construction, and the count is a lower bound for
the true separated number restricted to the cloud.

Growth slopes are read per eps from the count curve after saturation
filtering.  The reported per-eps slope is a least-squares fit of the
log count *increments* against log n: for curves of the shape
A + (c n)^h the plain log-log slope is biased low by the additive
constant, while the incremented fit recovers h exactly.  The plain fit
is kept alongside as a diagnostic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from ._accel import CIRCLE_ARC, FINITE_CIRCLE, FINITE_INTERVAL, LINF_PRODUCT
from .dynamics1d import Homeo1D, Orientation, Space
from .hyperspace import (ArcPt, FinitePt, FullCircle, IntervalPt, SampleCloud,
                         arc_hausdorff, finite_hausdorff)

__all__ = [
    "DynSystem",
    "base_system",
    "continuum_system",
    "symmetric_system",
    "product_system",
    "SeparatedCount",
    "EntropyEstimate",
    "EstimateError",
    "dyn_metric",
    "separated_count",
    "estimate_hpol",
    "fit_count_growth",
    "DEFAULT_N_LIST",
    "DEFAULT_EPS_LIST",
]

DEFAULT_N_LIST = (8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096)
DEFAULT_EPS_LIST = (0.2, 0.1, 0.05, 0.025)

BASE = -1


class EstimateError(ValueError):
    """Not enough unsaturated data points to fit a growth slope."""


@dataclass(frozen=True)
class DynSystem:
    """A map together with the state space the estimator iterates.

    target "base" iterates points of the space, "continuum" subcontinua,
    "symmetric" finite sets of at most k points; "product" is the plain
    k-fold product with the sup metric (used for cross-checks).
    """

    map: Homeo1D
    target: str
    k: int
    code: int
    name: str

    @property
    def space(self) -> Space:
        return self.map.space


def _require_preserving(f: Homeo1D, what: str):
    if f.orientation is not Orientation.PRESERVING:
        raise ValueError(
            f"{what} needs an orientation-preserving map; pass f.power(2)")


def base_system(f: Homeo1D) -> DynSystem:
    f.require_valid()
    return DynSystem(f, "base", 1, BASE, f"base[{f.space.value}]")


def continuum_system(f: Homeo1D) -> DynSystem:
    f.require_valid()
    _require_preserving(f, "the induced continuum system")
    code = LINF_PRODUCT if f.space is Space.INTERVAL else CIRCLE_ARC
    return DynSystem(f, "continuum", 2, code, f"continuum[{f.space.value}]")


def symmetric_system(f: Homeo1D, k: int) -> DynSystem:
    f.require_valid()
    _require_preserving(f, "the induced symmetric-product system")
    if k < 1:
        raise ValueError("k must be >= 1")
    if f.space is Space.INTERVAL:
        # for sorted pairs the Hausdorff distance is squeezed between the
        # extreme-coordinate gaps and their max, i.e. it equals the sup
        # metric, so k <= 2 takes the exact product fast path
        code = LINF_PRODUCT if k <= 2 else FINITE_INTERVAL
    else:
        code = FINITE_CIRCLE
    return DynSystem(f, "symmetric", k, code, f"symmetric{k}[{f.space.value}]")


def product_system(f: Homeo1D, k: int) -> DynSystem:
    f.require_valid()
    _require_preserving(f, "the product system")
    return DynSystem(f, "product", k, LINF_PRODUCT, f"product{k}[{f.space.value}]")


# -- state extraction -----------------------------------------------------------


class _StateSet:
    """Cloud states as grid-index tuples plus the lazily grown grid orbit."""

    def __init__(self, sys: DynSystem, columns, n_cap: int):
        self.sys = sys
        cols = [np.asarray(c, dtype=float) for c in columns]
        n_states = len(cols[0])
        if n_states == 0:
            raise ValueError("empty cloud")
        if sys.code == BASE:
            grid = cols[0]
            idx = np.arange(n_states, dtype=np.int64)[:, None]
        else:
            grid, inverse = np.unique(np.concatenate(cols), return_inverse=True)
            idx = np.ascontiguousarray(
                inverse.reshape(len(cols), n_states).T.astype(np.int64))
        self.grid = grid
        self.idx = idx
        self.n_states = n_states
        self.orbit = np.empty((len(grid), n_cap), dtype=np.float64)
        self.orbit[:, 0] = grid
        self.n_filled = 1
        self._D_running = None if sys.code == BASE \
            else np.zeros((len(grid), len(grid)))
        self._D_n = 0
        self._D_snapshots = {}
        f = sys.map
        if f.space is Space.INTERVAL:
            self._step = f.eval
        else:
            deg = f.degree

            def _step(u):
                frac = np.mod(u, 1.0)
                return f.lift(frac) + (u - frac) * deg

            self._step = _step

    def ensure_orbit(self, n: int):
        while self.n_filled < n:
            self.orbit[:, self.n_filled] = self._step(self.orbit[:, self.n_filled - 1])
            self.n_filled += 1

    def dist_matrix(self, n: int) -> np.ndarray:
        """Pairwise grid dynamic distance (lift metric) for the window n."""
        if n not in self._D_snapshots:
            self.ensure_orbit(n)
            while self._D_n < n:
                col = self.orbit[:, self._D_n]
                np.maximum(self._D_running, np.abs(col[:, None] - col[None, :]),
                           out=self._D_running)
                self._D_n += 1
            self._D_snapshots[n] = self._D_running.copy()
        return self._D_snapshots[n]

    def pack(self, order, carry, n, eps):
        self.ensure_orbit(n)
        orbit = self.orbit
        if self.sys.code == BASE:
            if _accel.NUMBA_AVAILABLE:
                return _accel.greedy_base(order, carry, orbit, n, eps,
                                          self.sys.space is Space.CIRCLE)
            return _accel.greedy_base_py(order, carry, orbit, n, eps,
                                         self.sys.space is Space.CIRCLE)
        D = self.dist_matrix(n)
        if _accel.NUMBA_AVAILABLE:
            return _accel.greedy_pack(self.idx, order, carry, D, orbit,
                                      n, eps, self.sys.code)
        return _accel.greedy_pack_py(self.idx, order, carry, D, orbit,
                                     n, eps, self.sys.code)


def state_columns(sys: DynSystem, cloud):
    """Raw lift-coordinate columns for the cloud under the given system."""
    if isinstance(cloud, SampleCloud) and "columns" in cloud.meta:
        cols = cloud.meta["columns"]
        if len(cols) != sys.k:
            raise ValueError(f"cloud has {len(cols)} state columns, system wants {sys.k}")
        return cols
    if isinstance(cloud, np.ndarray) or (isinstance(cloud, (list, tuple))
                                         and cloud and np.isscalar(cloud[0])):
        if sys.code != BASE:
            raise ValueError("bare coordinate arrays only describe base systems")
        return [np.asarray(cloud, dtype=float)]
    points = cloud.points if isinstance(cloud, SampleCloud) else list(cloud)
    if not points:
        raise ValueError("empty cloud")
    return [np.array(c, dtype=float) for c in zip(*(
        _state_tuple(sys, p) for p in points))]


def _state_tuple(sys: DynSystem, point):
    """Encode one cloud point as a lift-coordinate tuple of length sys.k."""
    if sys.code == BASE:
        if isinstance(point, FinitePt):
            if len(point.points) != 1:
                raise ValueError("base states are single points")
            return (point.points[0],)
        return (float(point),)
    if sys.target == "continuum":
        if sys.space is Space.INTERVAL:
            if not isinstance(point, IntervalPt):
                raise ValueError(f"expected IntervalPt, got {type(point).__name__}")
            return (point.lo, point.hi)
        if isinstance(point, FullCircle):
            return (0.0, 1.0)
        if not isinstance(point, (ArcPt,)):
            raise ValueError(f"expected ArcPt/FullCircle, got {type(point).__name__}")
        return (point.start, point.start + point.length)
    if sys.target == "symmetric":
        if not isinstance(point, FinitePt):
            raise ValueError(f"expected FinitePt, got {type(point).__name__}")
        pts = point.points
        if len(pts) > sys.k:
            raise ValueError("state cardinality exceeds the system bound")
        return pts + (pts[-1],) * (sys.k - len(pts))
    if sys.target == "product":
        return tuple(float(x) for x in point)
    raise ValueError(f"unknown system target {sys.target!r}")


# -- the metric and counting operations ------------------------------------------


def dyn_metric(sys: DynSystem, x, y, n: int) -> float:
    """max over 0 <= t < n of the state distance along the two orbits."""
    if n < 1:
        raise ValueError("the dynamic metric needs n >= 1")
    a = np.array(_state_tuple(sys, x), dtype=float)
    b = np.array(_state_tuple(sys, y), dtype=float)
    f = sys.map
    if f.space is Space.INTERVAL:
        step = f.eval
    else:
        deg = f.degree

        def step(u):
            frac = np.mod(u, 1.0)
            return f.lift(frac) + (u - frac) * deg

    dmax = 0.0
    for _ in range(n):
        dmax = max(dmax, _state_dist_np(sys, a, b))
        a, b = step(a), step(b)
    return dmax


def _state_dist_np(sys: DynSystem, a, b) -> float:
    code = sys.code
    if code == BASE:
        d = abs(float(a[0]) - float(b[0]))
        return min(d % 1.0, 1.0 - d % 1.0) if sys.space is Space.CIRCLE else d
    if code == LINF_PRODUCT:
        return float(np.max(np.abs(a - b)))
    if code == CIRCLE_ARC:
        return float(arc_hausdorff(a[0], min(a[1] - a[0], 1.0),
                                   b[0], min(b[1] - b[0], 1.0)))
    return finite_hausdorff(a, b, circle=code == FINITE_CIRCLE)


@dataclass
class SeparatedCount:
    """One greedy packing result at a window and scale."""

    n: int
    eps: float
    count: int
    saturated: bool = False
    witness: np.ndarray = None


def _cloud_size_and_resolution(cloud):
    if isinstance(cloud, SampleCloud):
        return len(cloud.meta["columns"][0]) if "columns" in cloud.meta \
            else len(cloud.points), cloud.resolution
    arr = np.asarray(cloud, dtype=float)
    res = float(np.min(np.diff(np.sort(arr)))) if arr.size > 1 else None
    return arr.size, res


def separated_count(cloud, sys: DynSystem, n: int, eps: float, seed: int = 0,
                    keep_witness: bool = False) -> SeparatedCount:
    """Greedy maximal (n, eps)-separated subset of the cloud."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    size, res = _cloud_size_and_resolution(cloud)
    if res is not None and res > eps / 4:
        warnings.warn(f"cloud resolution {res:g} is coarse for eps={eps:g}; "
                      "counts will undershoot", stacklevel=2)
    cols = state_columns(sys, cloud)
    state = _StateSet(sys, cols, n_cap=max(n, 1))
    order = _canonical_order(cols)
    witness = state.pack(order, np.empty(0, dtype=np.int64), n, eps)
    return SeparatedCount(n=n, eps=eps, count=len(witness),
                          witness=witness if keep_witness else None)


# -- slope fitting ----------------------------------------------------------------


@dataclass
class EpsFit:
    """Per-eps slope fit with its data and saturation bookkeeping."""

    eps: float
    counts: list
    n_used: list
    saturated: list
    slope: float = None
    r2: float = None
    loglog_slope: float = None
    method: str = ""
    n_diffs_used: int = 0
    reliable: bool = False


def _lsq(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), r2


def fit_count_growth(n_list, counts, cloud_size, fit_window: int = 4,
                     min_points: int = 3, freeze_at: int = 30):
    """Fit a growth exponent to a count curve, ignoring saturated cells.

    A cell is saturated when the cloud rather than the dynamics limits
    the count: the count exceeds an occupancy cap (cloud/8), repeats the
    previous value at a doubled window, or sits in a long exact plateau.
    Returns an EpsFit with slope None when fewer than min_points cells
    survive.
    """
    n_list = list(n_list)[:len(counts)]
    counts = list(counts)
    sat = []
    for i, c in enumerate(counts):
        cap = c > cloud_size / 8
        freeze = i > 0 and c == counts[i - 1] and c >= freeze_at
        plateau = (i >= 2 and c == counts[i - 1] == counts[i - 2]
                   and cloud_size / max(c, 1) < 8)
        sat.append(bool(cap or freeze or plateau))
    first_bad = next((i for i, s in enumerate(sat) if s), len(counts))
    fit = EpsFit(eps=None, counts=counts, n_used=n_list[:first_bad],
                 saturated=sat)
    if len(set(counts)) == 1 and counts[0] <= cloud_size / 8:
        # genuinely constant counts well below the cloud's capacity
        fit.slope, fit.r2, fit.loglog_slope = 0.0, 1.0, 0.0
        fit.method, fit.reliable = "constant", True
        return fit
    ns = n_list[:first_bad]
    cs = counts[:first_bad]
    if len(cs) < min_points:
        fit.method = "insufficient"
        return fit
    fit.loglog_slope = max(0.0, _lsq(np.log(ns), np.log(cs))[0])
    diffs = [(math.sqrt(ns[i] * ns[i + 1]), cs[i + 1] - cs[i])
             for i in range(len(cs) - 1)]
    diffs = [(m, d) for m, d in diffs if d > 0]
    # a shrinking tail increment means the cloud is running out of depth
    while len(diffs) >= 2 and diffs[-1][1] < diffs[-2][1]:
        diffs.pop()
    # an implausibly steep leading increment is a small-n transition bump
    while len(diffs) >= 3 and (math.log(diffs[1][1] / diffs[0][1])
                               / math.log(diffs[1][0] / diffs[0][0])) > 4.5:
        diffs.pop(0)
    if len(diffs) >= 2:
        use = diffs[-fit_window:]
        slope, r2 = _lsq(np.log([m for m, _ in use]), np.log([d for _, d in use]))
        fit.slope, fit.r2 = max(0.0, slope), r2
        fit.method = "diff"
        fit.n_diffs_used = len(use)
    else:
        slope, r2 = _lsq(np.log(ns), np.log(cs))
        fit.slope, fit.r2 = max(0.0, slope), r2
        fit.method = "loglog"
    return fit


@dataclass
class EntropyEstimate:
    """Fitted growth exponent with per-eps diagnostics."""

    slope: float
    eps_used: float
    r2: float
    n_list: list
    eps_list: list
    per_eps: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def row(self, eps) -> EpsFit:
        return self.per_eps[eps]


def estimate_hpol(sys: DynSystem, cloud, n_list=None, eps_list=None,
                  seed: int = 0, fit_window: int = 4, r2_threshold: float = 0.9,
                  min_points: int = 3, envelope_tol: float = 0.1) -> EntropyEstimate:
    """Estimate the polynomial growth exponent of separated counts.

    Runs one witness-carrying greedy chain per eps over the window list,
    fits each count curve, and reports the slope at the smallest eps
    whose fit is reliable (enough increments and r2 above threshold).
    """
    n_list = list(n_list if n_list is not None else DEFAULT_N_LIST)
    eps_list = list(eps_list if eps_list is not None else DEFAULT_EPS_LIST)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    cols = state_columns(sys, cloud)
    size = len(cols[0])
    state = _StateSet(sys, cols, n_cap=max(n_list))
    per_eps = {}
    order = _canonical_order(cols)
    for eps in eps_list:
        carry = np.empty(0, dtype=np.int64)
        counts = []
        for n in n_list:
            carry = state.pack(order, carry, n, eps)
            counts.append(len(carry))
            if counts[-1] > size / 8:
                break  # cloud cardinality exhausted; the cell is flagged anyway
            if (len(counts) >= 2 and counts[-1] == counts[-2]
                    and counts[-1] >= freeze_threshold(size)):
                break  # cloud depth exhausted, counts frozen
        fit = fit_count_growth(n_list, counts, size, fit_window=fit_window,
                               min_points=min_points)
        fit.eps = eps
        fit.reliable = (fit.slope is not None
                        and (fit.method == "constant"
                             or (fit.method == "diff" and fit.n_diffs_used >= 3
                                 and fit.r2 >= r2_threshold)))
        per_eps[eps] = fit
    usable = {e: f for e, f in per_eps.items() if f.slope is not None}
    if not usable:
        raise EstimateError(
            "fewer than 3 usable (n, count) pairs at every eps after "
            "saturation filtering")
    reliable = {e: f for e, f in usable.items() if f.reliable}
    pool = reliable if reliable else usable
    # Every per-eps fit is biased downward when the cloud truncates its
    # usable window, so take the smallest eps that keeps up with the best
    # reliable slope instead of the smallest eps outright.
    best = max(f.slope for f in pool.values())
    eps_used = min(e for e, f in pool.items() if f.slope >= best - envelope_tol)
    chosen = pool[eps_used]
    return EntropyEstimate(
        slope=chosen.slope, eps_used=eps_used, r2=chosen.r2,
        n_list=n_list, eps_list=eps_list, per_eps=per_eps,
        diagnostics={"cloud_size": size, "reliable_eps": sorted(reliable),
                     "selection": "smallest reliable eps within envelope_tol "
                     "of the best reliable slope" if reliable
                     else "best available (no eps met the reliability gate)"})


def freeze_threshold(size: int) -> int:
    return 30


def _canonical_order(cols) -> np.ndarray:
    """Lexicographic scan order over states.

    A canonical order makes counts independent of the seed, and on 1D
    base systems the first-fit sweep then returns a maximum (not merely
    maximal) separated subset because the dynamic metric is monotone
    along the coordinate order.
    """
    keys = tuple(np.asarray(c, dtype=float) for c in reversed(cols))
    return np.lexsort(keys).astype(np.int64)
