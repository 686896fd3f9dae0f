"""Orbit coding: letters, words, word counting and singularity analysis.

A coding family is a list of letters, each a region of the state space
kept away from the fixed set.  The word of an orbit records which letter
(if any) the orbit sits in at each step; the complement letter is
rendered as "-".  Letters are required to be pairwise disjoint so the
word of an orbit is unique; coding raises if a state ever lies in two
letters at once.

Word counts over a sample cloud are lower bounds for the true number of
admissible words, consistent as the cloud resolution shrinks, and feed
the same growth-slope fit as the separated-set estimator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics1d import Space
from .entropy import (BASE, DynSystem, EntropyEstimate, EstimateError,
                      fit_count_growth, state_columns, _state_tuple)
from .hyperspace import (ArcPt, FinitePt, FullCircle, HyperKind, IntervalPt,
                         arc_hausdorff, fixed_hyperpoints, hausdorff,
                         induce_continuum)

__all__ = [
    "IntervalRegion",
    "ArcRegion",
    "BallRegion",
    "SlabRegion",
    "LetterSet",
    "CodingWord",
    "OverlapError",
    "SingularityVerdict",
    "validate_letters",
    "code_orbit",
    "word_count",
    "word_set",
    "relative_entropy",
    "max_visits",
    "check_singular",
    "eq2_condition",
    "local_entropy",
    "LocalEntropyResult",
]

INFTY = 255  # code for the complement letter in packed word arrays


# -- regions -----------------------------------------------------------------


@dataclass(frozen=True)
class IntervalRegion:
    """Half-open interval (lo, hi] of base states on the line."""

    lo: float
    hi: float

    def contains(self, cols):
        x = cols[0]
        return (x > self.lo) & (x <= self.hi)

    def gap_to_fixed(self, fixed_states, space: Space) -> float:
        gaps = []
        for p in fixed_states:
            p = float(p)
            if self.lo <= p <= self.hi:
                return 0.0
            gaps.append(min(abs(p - self.lo), abs(p - self.hi)))
        return min(gaps) if gaps else np.inf


@dataclass(frozen=True)
class ArcRegion:
    """Half-open circle arc (start, start+length], counterclockwise."""

    start: float
    length: float

    def contains(self, cols):
        offs = (cols[0] - self.start) % 1.0
        return (offs > 0) & (offs <= self.length)

    def gap_to_fixed(self, fixed_states, space: Space) -> float:
        gaps = []
        for p in fixed_states:
            offs = (float(p) - self.start) % 1.0
            if offs <= self.length:
                return 0.0
            gaps.append(min(offs - self.length, 1.0 - offs))
        return min(gaps) if gaps else np.inf


@dataclass(frozen=True)
class BallRegion:
    """Open metric ball around a hyperspace point."""

    center: object
    radius: float
    circle: bool = False  # metric for FinitePt centers

    def contains(self, cols):
        c = self.center
        if isinstance(c, IntervalPt):
            return np.maximum(np.abs(cols[0] - c.lo),
                              np.abs(cols[1] - c.hi)) < self.radius
        if isinstance(c, (ArcPt, FullCircle)):
            s = 0.0 if isinstance(c, FullCircle) else c.start
            ln = 1.0 if isinstance(c, FullCircle) else c.length
            lengths = np.minimum(cols[1] - cols[0], 1.0)
            return arc_hausdorff(np.mod(cols[0], 1.0), lengths, s, ln) < self.radius
        if isinstance(c, FinitePt):
            return _finite_ball(cols, np.array(c.points), self.circle) < self.radius
        raise TypeError(f"no ball membership for {type(c).__name__}")

    def gap_to_fixed(self, fixed_states, space: Space) -> float:
        gaps = [hausdorff(space, self.center, p) - self.radius
                for p in fixed_states]
        return min(gaps) if gaps else np.inf


def _finite_ball(cols, center, circle):
    """Hausdorff distance of each column-tuple state to a fixed point set."""
    states = np.stack(cols, axis=1)  # (N, k)
    d = np.abs(states[:, :, None] - center[None, None, :])
    if circle:
        d = np.mod(d, 1.0)
        d = np.minimum(d, 1.0 - d)
    return np.maximum(d.min(axis=2).max(axis=1), d.min(axis=1).max(axis=1))


@dataclass(frozen=True)
class SlabRegion:
    """Tuple states whose coordinate ``coord`` lies in (lo, hi].

    With exclusive=True the other coordinates must stay outside (lo, hi],
    which keeps slabs over the same window pairwise disjoint.
    """

    coord: int
    lo: float
    hi: float
    exclusive: bool = True

    def _inside(self, x):
        return (x > self.lo) & (x <= self.hi)

    def contains(self, cols):
        hit = self._inside(cols[self.coord])
        if self.exclusive:
            for a, col in enumerate(cols):
                if a != self.coord:
                    hit &= ~self._inside(col)
        return hit

    def gap_to_fixed(self, fixed_states, space: Space) -> float:
        gaps = []
        for s in fixed_states:
            pts = s.points if isinstance(s, FinitePt) else (float(s),)
            for p in pts:
                if self.lo <= p <= self.hi:
                    return 0.0
                gaps.append(min(abs(p - self.lo), abs(p - self.hi)))
        return min(gaps) if gaps else np.inf


@dataclass(frozen=True)
class LetterSet:
    """One coding letter: an identifier plus its region."""

    id: str
    region: object


@dataclass(frozen=True)
class CodingWord:
    """A word over the letters of a family; None marks the complement."""

    letters: tuple

    def __str__(self):
        return ",".join("-" if w is None else str(w) for w in self.letters)

    def __len__(self):
        return len(self.letters)


class OverlapError(ValueError):
    """A state fell into two letters at once; letters must be disjoint."""


def _fixed_states(sys: DynSystem):
    if sys.code == BASE:
        return list(sys.map.fixed_points())
    kind = HyperKind.CONTINUA if sys.target == "continuum" else HyperKind.SYMMETRIC
    return fixed_hyperpoints(sys.map, kind,
                             k=None if sys.target == "continuum" else sys.k)


def validate_letters(sys: DynSystem, letters) -> None:
    """Static check: every letter keeps a positive gap to the fixed set."""
    fixed = _fixed_states(sys)
    for let in letters:
        gap = let.region.gap_to_fixed(fixed, sys.space)
        if gap <= 0:
            raise ValueError(
                f"letter {let.id!r} touches the fixed/non-wandering set "
                f"(gap {gap:g}); letters must be wandering regions")


# -- orbit coding ---------------------------------------------------------------


def _evolver(sys: DynSystem, backward: bool = False):
    f = sys.map.inverse if backward else sys.map
    if f.space is Space.INTERVAL:
        return f.eval
    deg = f.degree

    def step(u):
        frac = np.mod(u, 1.0)
        return f.lift(frac) + (u - frac) * deg

    return step


def _advance(cols, step):
    stacked = step(np.stack(cols))
    return [stacked[a] for a in range(len(cols))]


def _letter_codes(letters, cols, where: str):
    """Letter index per state (INFTY for the complement); overlap checked."""
    n_states = len(cols[0])
    code = np.full(n_states, INFTY, dtype=np.uint8)
    taken = np.zeros(n_states, dtype=bool)
    for li, let in enumerate(letters):
        hit = np.asarray(let.region.contains(cols), dtype=bool)
        both = hit & taken
        if np.any(both):
            raise OverlapError(
                f"state #{int(np.flatnonzero(both)[0])} lies in two letters "
                f"at {where}; coding letters must be pairwise disjoint")
        code[hit] = li
        taken |= hit
    return code


def code_orbit(sys: DynSystem, letters, x, n: int) -> CodingWord:
    """The word of the length-n orbit of the state x."""
    cols = [np.array([v], dtype=float) for v in _state_tuple(sys, x)]
    step = _evolver(sys)
    out = []
    for t in range(n):
        code = _letter_codes(letters, cols, f"orbit step {t}")[0]
        out.append(None if code == INFTY else letters[code].id)
        if t + 1 < n:
            cols = _advance(cols, step)
    return CodingWord(tuple(out))


def _word_matrix(sys: DynSystem, letters, cloud, n: int) -> np.ndarray:
    cols = [np.asarray(c, dtype=float) for c in state_columns(sys, cloud)]
    step = _evolver(sys)
    words = np.empty((len(cols[0]), n), dtype=np.uint8)
    for t in range(n):
        words[:, t] = _letter_codes(letters, cols, f"step {t}")
        if t + 1 < n:
            cols = _advance(cols, step)
    return words


def word_count(sys: DynSystem, letters, cloud, n: int) -> int:
    """Number of distinct words realized by cloud orbits of length n."""
    words = _word_matrix(sys, letters, cloud, n)
    return len(np.unique(words, axis=0))


def word_set(sys: DynSystem, letters, cloud, n: int) -> set:
    """The realized words themselves (for logs and small clouds)."""
    words = np.unique(_word_matrix(sys, letters, cloud, n), axis=0)
    return {CodingWord(tuple(None if v == INFTY else letters[v].id
                             for v in row)) for row in words}


def relative_entropy(sys: DynSystem, letters, cloud, n_list,
                     fit_window: int = 4, min_points: int = 3) -> EntropyEstimate:
    """Growth exponent of the distinct-word count over the window list."""
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    words = _word_matrix(sys, letters, cloud, max(n_list))
    size = words.shape[0]
    counts = []
    for n in n_list:
        counts.append(len(np.unique(words[:, :n], axis=0)))
        if counts[-1] > size / 8:
            break
        if len(counts) >= 2 and counts[-1] == counts[-2] and counts[-1] >= 30:
            break
    fit = fit_count_growth(n_list, counts, size, fit_window=fit_window,
                           min_points=min_points)
    if fit.slope is None:
        raise EstimateError("fewer than 3 usable word counts after "
                            "saturation filtering")
    fit.reliable = fit.method == "constant" or (
        fit.method == "diff" and fit.n_diffs_used >= 2)
    return EntropyEstimate(
        slope=fit.slope, eps_used=None, r2=fit.r2, n_list=n_list,
        eps_list=[], per_eps={None: fit},
        diagnostics={"cloud_size": size, "letters": [l.id for l in letters],
                     "counts": counts})


# -- visit bounds -----------------------------------------------------------------


def max_visits(sys: DynSystem, region, cloud, horizon: int) -> int:
    """Max number of orbit hits of the region over times in [-horizon, horizon]."""
    total = None
    edge = None
    for backward in (False, True):
        cols = [np.asarray(c, dtype=float) for c in state_columns(sys, cloud)]
        step = _evolver(sys, backward=backward)
        visits = np.zeros(len(cols[0]), dtype=np.int64)
        times = range(0, horizon + 1) if not backward else range(1, horizon + 1)
        if backward:
            cols = _advance(cols, step)
        for t in times:
            hit = np.asarray(region.contains(cols), dtype=bool)
            visits += hit
            if t == horizon:
                edge = hit if edge is None else (edge | hit)
            if t < horizon:
                cols = _advance(cols, step)
        total = visits if total is None else total + visits
    if len(total) == 0:
        return 0
    best = int(np.max(total))
    if edge is not None and np.any(edge & (total == best)):
        warnings.warn("an orbit attaining the visit maximum still hits the "
                      "region at the horizon boundary; the bound may "
                      "undercount", stacklevel=2)
    return best


# -- singularity ------------------------------------------------------------------


@dataclass(frozen=True)
class SingularityVerdict:
    """Outcome of a mutual-singularity probe at level M."""

    kind: str  # "mutually-singular" | "not-singular" | "inconclusive"
    pair: tuple
    witness: object = None
    times: tuple = None
    reason: str = ""
    horizon: int = None

    @property
    def is_singular(self) -> bool:
        return self.kind == "mutually-singular"


def _region_hits_over_time(sys, source_region, target_region, cloud, horizon):
    """hits[d] = some cloud state in source has its d-th image in target."""
    cols = [np.asarray(c, dtype=float) for c in state_columns(sys, cloud)]
    inside = np.asarray(source_region.contains(cols), dtype=bool)
    hits = np.zeros(horizon + 1, dtype=bool)
    if not np.any(inside):
        return hits, {}, 0
    n_src = int(np.sum(inside))
    cols = [c[inside] for c in cols]
    origin = np.flatnonzero(inside)
    step = _evolver(sys)
    witness = {}
    for d in range(1, horizon + 1):
        cols = _advance(cols, step)
        hit = np.asarray(target_region.contains(cols), dtype=bool)
        if np.any(hit):
            hits[d] = True
            witness[d] = int(origin[int(np.flatnonzero(hit)[0])])
    return hits, witness, n_src


def _fixed_columns(sys):
    if sys.code == BASE:
        return [sys.map.fixed_points()]
    fixed = _fixed_states(sys)
    return [np.array(c, dtype=float)
            for c in zip(*(_state_tuple(sys, p) for p in fixed))]


def _collapse_time(sys, region, cloud, margin, horizon):
    """Steps until every region state sits within margin of the fixed set."""
    cols = [np.asarray(c, dtype=float) for c in state_columns(sys, cloud)]
    inside = np.asarray(region.contains(cols), dtype=bool)
    if not np.any(inside):
        return 0
    cols = [c[inside] for c in cols]
    fixed_cols = _fixed_columns(sys)
    step = _evolver(sys)
    for t in range(horizon + 1):
        if _worst_dist_to_fixed(sys, cols, fixed_cols) < margin:
            return t
        cols = _advance(cols, step)
    return None


def _worst_dist_to_fixed(sys, cols, fixed_cols):
    """max over states of the distance to the nearest fixed state."""
    circle = sys.space is Space.CIRCLE
    best = None
    for j in range(len(fixed_cols[0])):
        d = None
        for a, col in enumerate(cols):
            da = np.abs(col - fixed_cols[a][j])
            if circle:
                da = np.mod(da, 1.0)
                da = np.minimum(da, 1.0 - da)
            d = da if d is None else np.maximum(d, da)
        best = d if best is None else np.minimum(best, d)
    return float(np.max(best))


def _region_gap(sys, letter) -> float:
    return letter.region.gap_to_fixed(_fixed_states(sys), sys.space)


def _cloud_state(sys, cloud, position):
    cols = state_columns(sys, cloud)
    tup = tuple(float(c[position]) for c in cols)
    if sys.code == BASE:
        return tup[0]
    if sys.target == "continuum":
        if sys.space is Space.INTERVAL:
            return IntervalPt(tup[0], tup[1])
        return FullCircle() if tup[1] - tup[0] >= 1.0 else ArcPt(tup[0], tup[1])
    return FinitePt.of(tup, k=sys.k)


def check_singular(sys: DynSystem, u1, u2, M: int, horizon: int,
                   cloud) -> SingularityVerdict:
    """Probe whether two regions admit orbit visits more than M steps apart.

    The constructive circle witness (a thin arc grown from a backward
    preimage near one region and a forward point near the other) is tried
    first; otherwise the cloud is scanned for visit-time differences.  A
    not-singular verdict additionally requires both regions' orbits to
    collapse onto the fixed set within the horizon, which bounds every
    achievable time difference.
    """
    pair = (u1.id, u2.id)
    built = _constructive_arc_witness(sys, u1, u2, M, horizon)
    if built is not None:
        witness, times = built
        return SingularityVerdict("mutually-singular", pair, witness=witness,
                                  times=times, horizon=horizon)
    hits12, wit12, n1 = _region_hits_over_time(sys, u1.region, u2.region,
                                               cloud, horizon)
    hits21, wit21, n2 = _region_hits_over_time(sys, u2.region, u1.region,
                                               cloud, horizon)
    if n1 == 0 and n2 == 0:
        return SingularityVerdict("inconclusive", pair,
                                  reason="the cloud does not sample either region",
                                  horizon=horizon)
    d12 = int(np.flatnonzero(hits12)[-1]) if np.any(hits12) else 0
    d21 = int(np.flatnonzero(hits21)[-1]) if np.any(hits21) else 0
    if max(d12, d21) > M:
        if d12 >= d21:
            state = _cloud_state(sys, cloud, wit12[d12])
            times = (1, 1 + d12)
        else:
            state = _cloud_state(sys, cloud, wit21[d21])
            times = (1 + d21, 1)
        return SingularityVerdict("mutually-singular", pair, witness=state,
                                  times=times, horizon=horizon)
    t1 = _collapse_time(sys, u1.region, cloud, _region_gap(sys, u2) / 2, horizon)
    t2 = _collapse_time(sys, u2.region, cloud, _region_gap(sys, u1) / 2, horizon)
    if t1 is not None and t2 is not None:
        return SingularityVerdict(
            "not-singular", pair,
            reason=(f"max observed visit-time difference {max(d12, d21)} <= "
                    f"M={M}; both regions collapse onto the fixed set within "
                    f"{max(t1, t2)} steps"),
            horizon=horizon)
    return SingularityVerdict("inconclusive", pair,
                              reason="horizon too small to bound visit times",
                              horizon=horizon)


def _constructive_arc_witness(sys, u1, u2, M, horizon):
    """The thin-arc witness for balls around arcs [a,p] and [q,a]."""
    if sys.target != "continuum" or sys.space is not Space.CIRCLE:
        return None
    r1 = getattr(u1.region, "radius", None)
    r2 = getattr(u2.region, "radius", None)
    c1 = getattr(u1.region, "center", None)
    c2 = getattr(u2.region, "center", None)
    if not (isinstance(c1, ArcPt) and isinstance(c2, ArcPt)) or r1 is None:
        return None
    f = sys.map
    fix = f.fixed_points()
    if len(fix) != 1:
        return None
    a = float(fix[0])

    def near(x, y):
        d = abs(x - y) % 1.0
        return min(d, 1.0 - d) < 1e-9

    if not (near(c1.start, a) and near((c2.start + c2.length) % 1.0, a)):
        return None
    p = (c1.start + c1.length) % 1.0
    q = c2.start
    y = p
    t1 = None
    z = y
    for t in range(1, horizon + 1):
        z = f.eval(z)
        if f.dist(z, a) < r2 / 2:
            t1 = t
            break
    if t1 is None:
        return None
    inv = f.inverse
    x = q
    for m in range(1, horizon + 1):
        x = inv.eval(x)
        if m <= max(M, t1):
            continue
        off_x = (x - a) % 1.0
        off_y = (y - a) % 1.0
        if 0 < off_x < off_y and f.dist(x, a) < r1 / 2:
            witness = ArcPt(x, y)
            img = witness
            for _ in range(m):
                img = induce_continuum(f, img)
            if (hausdorff(Space.CIRCLE, witness, c1) < r1
                    and hausdorff(Space.CIRCLE, img, c2) < r2):
                return witness, (1, 1 + m)
            return None
    return None


def eq2_condition(sys: DynSystem, y1, y2, horizon: int, cloud):
    """Smallest L so the region y1 reaches y2 at every time in [L, horizon].

    Returns None when even the horizon itself misses, or when the cloud
    has no states in y1.
    """
    hits, _, n_src = _region_hits_over_time(sys, y1.region, y2.region,
                                            cloud, horizon)
    if n_src == 0 or not hits[horizon]:
        return None
    missing = np.flatnonzero(~hits[1:horizon + 1])
    return int(missing[-1]) + 2 if len(missing) else 1


# -- local entropy ----------------------------------------------------------------


@dataclass
class LocalEntropyResult:
    radii: list
    estimates: list
    final: float
    monotone: bool
    flags: list = field(default_factory=list)


def local_entropy(sys: DynSystem, states, cloud, radii, n_list,
                  tol: float = 0.15) -> LocalEntropyResult:
    """Relative entropy of shrinking ball families around the given states.

    The slope sequence should be non-increasing as the balls shrink; a
    rise beyond tol is flagged as a sampling artifact, not an error.
    """
    radii = list(radii)
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    circle = sys.space is Space.CIRCLE
    estimates = []
    flags = []
    for r in radii:
        letters = [LetterSet(f"b{i}", BallRegion(s, r, circle=circle))
                   for i, s in enumerate(states)]
        validate_letters(sys, letters)
        estimates.append(relative_entropy(sys, letters, cloud, n_list))
    slopes = [e.slope for e in estimates]
    monotone = True
    for i in range(1, len(slopes)):
        if slopes[i] > slopes[i - 1] + tol:
            monotone = False
            flags.append(f"slope rose {slopes[i - 1]:.3f} -> {slopes[i]:.3f} "
                         f"at radius {radii[i]:g}: sampling artifact")
    return LocalEntropyResult(radii=radii, estimates=estimates,
                              final=slopes[-1] if slopes else 0.0,
                              monotone=monotone, flags=flags)
