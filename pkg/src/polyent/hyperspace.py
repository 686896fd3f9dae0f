"""Hyperspace points over [0,1] and the circle, with the exact Hausdorff metric.

Three families of points are supported: closed subintervals of [0,1]
(the subcontinua of the interval), closed arcs / the full circle (the
subcontinua of the circle), and finite sets of at most k points (the
k-fold symmetric product).  Arcs are ordered counterclockwise from
``start`` to ``end``; a zero-length arc is a singleton and the full
circle is its own variant, never an alias of an arc.

The arc/arc Hausdorff distance is an exact case analysis on endpoint
configurations; the naive endpoint formula fails when arcs sit on
opposite sides of the circle, so the test suite cross-checks this code
against a dense-sampling oracle.  The distance between an arc and the
full circle is the covering radius of the complementary gap (a
convention consistent with the metric definition; see README).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .dynamics1d import Homeo1D, Orientation, Space

__all__ = [
    "IntervalPt",
    "ArcPt",
    "FullCircle",
    "FinitePt",
    "TrianglePt",
    "HyperKind",
    "SampleCloud",
    "hausdorff",
    "induce_continuum",
    "induce_symmetric",
    "fixed_hyperpoints",
    "Triangle",
    "AkSimplex",
    "AkStrict",
    "CircleA",
    "CircleB",
    "Dij",
    "sample_region",
    "serialize_point",
    "parse_point",
    "save_cloud",
    "load_cloud",
]


# -- point variants -------------------------------------------------------


@dataclass(frozen=True)
class IntervalPt:
    """A closed subinterval [lo, hi] of [0,1]; lo == hi is a singleton."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not 0 <= self.lo <= self.hi <= 1:
            raise ValueError(f"need 0 <= lo <= hi <= 1, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class ArcPt:
    """A closed circle arc, counterclockwise from start to end (coords in [0,1)).

    start == end is the singleton {start}.  An arc never equals the full
    circle; use FullCircle for that.
    """

    start: float
    end: float

    def __post_init__(self):
        object.__setattr__(self, "start", float(self.start) % 1.0)
        object.__setattr__(self, "end", float(self.end) % 1.0)

    @property
    def length(self) -> float:
        return (self.end - self.start) % 1.0

    def contains(self, x) -> bool:
        return ((x - self.start) % 1.0) <= self.length + 1e-15


@dataclass(frozen=True)
class FullCircle:
    """The whole circle as a hyperspace point."""


@dataclass(frozen=True)
class FinitePt:
    """A set of at most k points, sorted with duplicates collapsed."""

    points: tuple
    k: int

    @staticmethod
    def of(points, k=None) -> "FinitePt":
        pts = tuple(sorted(set(float(p) for p in points)))
        if not pts:
            raise ValueError("finite hyperspace points are nonempty")
        if k is None:
            k = len(pts)
        if len(pts) > k:
            raise ValueError(f"{len(pts)} points exceed cardinality bound {k}")
        return FinitePt(points=pts, k=k)


@dataclass(frozen=True)
class TrianglePt:
    """Coordinates of a subinterval in the triangle {(x, y): x <= y}."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if self.x > self.y:
            raise ValueError("triangle points need x <= y")

    @staticmethod
    def from_interval(p: IntervalPt) -> "TrianglePt":
        return TrianglePt(p.lo, p.hi)

    def to_interval(self) -> IntervalPt:
        return IntervalPt(self.x, self.y)


class HyperKind(enum.Enum):
    CONTINUA = "continua"
    SYMMETRIC = "symmetric"


# -- metric ----------------------------------------------------------------


def _circle_dist(x, y):
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return np.minimum(d % 1.0, 1.0 - d % 1.0)


def arc_point_dist(x, start, length):
    """Distance from circle points x to the arc (start, length); vectorized.

    length == 1 means the full circle.
    """
    x = np.asarray(x, dtype=float)
    t = (x - start) % 1.0
    end = start + length
    outside = t > length
    return np.where(outside,
                    np.minimum(_circle_dist(x, start), _circle_dist(x, end)),
                    0.0)


def arc_directed(s1, l1, s2, l2):
    """sup over the arc (s1, l1) of the distance to the arc (s2, l2)."""
    s1 = np.asarray(s1, dtype=float)
    l1 = np.asarray(l1, dtype=float)
    s2 = np.asarray(s2, dtype=float)
    l2 = np.asarray(l2, dtype=float)
    gap = 1.0 - l2
    d_start = arc_point_dist(s1, s2, l2)
    d_end = arc_point_dist((s1 + l1) % 1.0, s2, l2)
    # the farthest point from the target arc is the midpoint of its
    # complementary gap; it matters only when the source arc covers it
    mid = (s2 + l2 + gap / 2.0) % 1.0
    covers_mid = ((mid - s1) % 1.0) <= l1
    full1 = l1 >= 1.0
    peak = np.where(covers_mid | full1, gap / 2.0, 0.0)
    out = np.maximum(np.maximum(d_start, d_end), peak)
    return np.where(full1, gap / 2.0, out)


def arc_hausdorff(s1, l1, s2, l2):
    """Exact Hausdorff distance between arcs given as (start, length).

    length == 1 encodes the full circle, length == 0 a singleton.
    """
    return np.maximum(arc_directed(s1, l1, s2, l2), arc_directed(s2, l2, s1, l1))


def finite_hausdorff(a, b, circle: bool) -> float:
    """Hausdorff distance between two finite point sets."""
    pa = np.asarray(a, dtype=float)[:, None]
    pb = np.asarray(b, dtype=float)[None, :]
    d = _circle_dist(pa, pb) if circle else np.abs(pa - pb)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _arc_params(p):
    if isinstance(p, FullCircle):
        return 0.0, 1.0
    return p.start, p.length


def hausdorff(space: Space, a, b) -> float:
    """Exact Hausdorff distance between two points of the same hyperspace."""
    if isinstance(a, IntervalPt) and isinstance(b, IntervalPt):
        if space is not Space.INTERVAL:
            raise ValueError("interval points live over the interval")
        return max(abs(a.lo - b.lo), abs(a.hi - b.hi))
    if isinstance(a, (ArcPt, FullCircle)) and isinstance(b, (ArcPt, FullCircle)):
        if space is not Space.CIRCLE:
            raise ValueError("arcs live over the circle")
        s1, l1 = _arc_params(a)
        s2, l2 = _arc_params(b)
        return float(arc_hausdorff(s1, l1, s2, l2))
    if isinstance(a, FinitePt) and isinstance(b, FinitePt):
        return finite_hausdorff(a.points, b.points, circle=space is Space.CIRCLE)
    raise ValueError(
        f"mismatched hyperspace kinds: {type(a).__name__} vs {type(b).__name__}")


# -- induced maps ------------------------------------------------------------


def induce_continuum(f: Homeo1D, a):
    """Image of a subcontinuum under the map induced by f."""
    if isinstance(a, FullCircle):
        return FullCircle()
    if isinstance(a, IntervalPt):
        u, v = f.eval(a.lo), f.eval(a.hi)
        return IntervalPt(min(u, v), max(u, v))
    if isinstance(a, ArcPt):
        u, v = f.eval(a.start), f.eval(a.end)
        if f.orientation is Orientation.PRESERVING:
            return ArcPt(u, v)
        return ArcPt(v, u)
    raise TypeError(f"not a continuum point: {type(a).__name__}")


def induce_symmetric(f: Homeo1D, s: FinitePt) -> FinitePt:
    """Pointwise image of a finite set; cardinality never increases."""
    return FinitePt.of((f.eval(p) for p in s.points), k=s.k)


def fixed_hyperpoints(f: Homeo1D, kind: HyperKind, k: int = None) -> list:
    """All fixed points of the induced map on the requested hyperspace."""
    f.require_valid()
    fix = [float(p) for p in f.fixed_points()]
    if kind is HyperKind.CONTINUA:
        if f.space is Space.INTERVAL:
            return [IntervalPt(a, b) for a, b in
                    itertools.combinations_with_replacement(fix, 2)]
        out = [ArcPt(a, a) for a in fix]
        out += [ArcPt(a, b) for a in fix for b in fix if a != b]
        out.append(FullCircle())
        return out
    if kind is HyperKind.SYMMETRIC:
        if k is None:
            raise ValueError("symmetric products need the cardinality bound k")
        out = []
        for j in range(1, min(k, len(fix)) + 1):
            out += [FinitePt.of(c, k=k) for c in itertools.combinations(fix, j)]
        return out
    raise ValueError(f"unknown hyperspace kind {kind!r}")


# -- regions and sampling -----------------------------------------------------


@dataclass(frozen=True)
class Triangle:
    """All subintervals of [0,1], as the triangle {(lo, hi): lo <= hi}."""


@dataclass(frozen=True)
class AkSimplex:
    """All nonempty subsets of [0,1] with at most k points."""

    k: int


@dataclass(frozen=True)
class AkStrict:
    """Subsets of exactly k points with pairwise gaps >= the resolution."""

    k: int


@dataclass(frozen=True)
class CircleA:
    """Arcs [x -> y] with x between the fixed point a and y (counterclockwise),
    plus the degenerate members: singletons, arcs touching a, the full circle."""

    a: float


@dataclass(frozen=True)
class CircleB:
    """Arcs [x -> y] that wrap through the fixed point a, plus degenerates."""

    a: float


@dataclass(frozen=True)
class Dij:
    """Arcs [x -> y] with x in the arc ci and y in the arc cj (fixed endpoints)."""

    ci: tuple
    cj: tuple


@dataclass
class SampleCloud:
    """A finite grid of hyperspace points standing in for a region.

    ``grid``/``index`` are an optional fast path: when the cloud is a grid
    product, ``index`` holds per-point coordinate indices into ``grid`` (or
    into lift coordinates stored in ``meta``).  Estimators fall back to the
    materialized points when absent.
    """

    kind: str
    resolution: float
    points: list
    grid: np.ndarray = None
    index: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)


def _axis(resolution: float) -> np.ndarray:
    n = int(round(1.0 / resolution))
    if n < 1:
        raise ValueError(f"resolution {resolution} too coarse for [0,1]")
    return np.linspace(0.0, 1.0, n + 1)


def sample_region(region, resolution: float) -> SampleCloud:
    """Uniform grid filling the named region (see the region dataclasses).

    Grid-product regions also carry ``meta["axes"]`` (one coordinate axis
    per dimension, lift coordinates for circle families) plus an ``index``
    array so estimators can work on integer tuples.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if isinstance(region, Triangle):
        g = _axis(resolution)
        idx = np.array([(i, j) for i in range(len(g)) for j in range(i, len(g))],
                       dtype=np.int64)
        pts = [IntervalPt(g[i], g[j]) for i, j in idx]
        cloud = SampleCloud("triangle", resolution, pts, grid=g, index=idx)
        cloud.meta.update(axes=[g, g], family="interval")
        return cloud
    if isinstance(region, AkStrict):
        g = _axis(resolution)
        if len(g) < region.k:
            raise ValueError("resolution too coarse to pick k distinct points")
        idx = np.array(list(itertools.combinations(range(len(g)), region.k)),
                       dtype=np.int64)
        pts = [FinitePt.of(g[list(c)], k=region.k) for c in idx]
        cloud = SampleCloud(f"akstrict{region.k}", resolution, pts, grid=g, index=idx)
        cloud.meta.update(axes=[g] * region.k, family="finite")
        return cloud
    if isinstance(region, AkSimplex):
        g = _axis(resolution)
        pts = []
        for j in range(1, region.k + 1):
            pts += [FinitePt.of(g[list(c)], k=region.k)
                    for c in itertools.combinations(range(len(g)), j)]
        cloud = SampleCloud(f"aksimplex{region.k}", resolution, pts, grid=g)
        cloud.meta.update(family="finite")
        return cloud
    if isinstance(region, (CircleA, CircleB)):
        a = region.a % 1.0
        g = _axis(resolution)  # counterclockwise offsets from a
        m = len(g)
        pts, idx = [], []
        lower = isinstance(region, CircleB)
        for i in range(m):
            for j in range(i, m):
                if lower:
                    lo, hi = a + g[j], a + g[i] + 1.0
                    if hi - lo == 1.0 and g[j] > 0:
                        continue  # every (t, t) pair is the same full circle
                    idx.append((j, i))
                else:
                    if i == j == m - 1:
                        continue  # {a} again, already sampled at offset 0
                    lo, hi = a + g[i], a + g[j]
                    idx.append((i, j))
                pts.append(_lift_to_point(lo, hi))
        name = f"circle{'B' if lower else 'A'}@{a:g}"
        cloud = SampleCloud(name, resolution, pts, grid=g,
                            index=np.array(idx, dtype=np.int64))
        axes = [a + g, a + g + 1.0] if lower else [a + g, a + g]
        cloud.meta.update(anchor=a, axes=axes, family="arc")
        return cloud
    if isinstance(region, Dij):
        wi = float(region.ci[1]) - float(region.ci[0])
        wj = float(region.cj[1]) - float(region.cj[0])
        if not (0 < wi <= 1 and 0 < wj <= 1):
            raise ValueError("Dij windows must have positive length <= 1")
        xlo = float(region.ci[0]) % 1.0
        ylo = float(region.cj[0]) % 1.0
        same = abs(xlo - ylo) < 1e-12 and abs(wi - wj) < 1e-12
        xg = _window_axis((xlo, xlo + wi), resolution)
        if same:
            # seam case x == y: arcs switch between short and wrapping, so
            # there is no uniform lift axis; points only
            pts = []
            for x in xg:
                for y in xg:
                    ylift = y if y >= x else y + 1.0
                    pts.append(_lift_to_point(x, ylift))
            cloud = SampleCloud("dij", resolution, _dedupe(pts))
            cloud.meta.update(family="arc")
            return cloud
        if ylo < xlo:
            ylo += 1.0
        yg = _window_axis((ylo, ylo + wj), resolution)
        pts, idx = [], []
        for i, x in enumerate(xg):
            for j, y in enumerate(yg):
                if 0.0 <= y - x <= 1.0:
                    pts.append(_lift_to_point(x, y))
                    idx.append((i, j))
        cloud = SampleCloud("dij", resolution, pts,
                            index=np.array(idx, dtype=np.int64))
        cloud.meta.update(axes=[xg, yg], family="arc")
        return cloud
    raise ValueError(f"unknown region {region!r}")


def _dedupe(points):
    seen = set()
    out = []
    for p in points:
        key = serialize_point(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def _window_axis(window, resolution):
    lo, hi = float(window[0]), float(window[1])
    n = max(1, int(round((hi - lo) / resolution)))
    return np.linspace(lo, hi, n + 1)


def _lift_to_point(p, q):
    """Arc from lift coordinates p <= q <= p + 1."""
    length = q - p
    if length >= 1.0:
        return FullCircle()
    return ArcPt(p % 1.0, q % 1.0)


# -- serialization -------------------------------------------------------------


def serialize_point(p) -> str:
    if isinstance(p, IntervalPt):
        return f"I:{p.lo!r}:{p.hi!r}"
    if isinstance(p, ArcPt):
        return f"A:{p.start!r}:{p.end!r}"
    if isinstance(p, FullCircle):
        return "S1"
    if isinstance(p, FinitePt):
        return "F:" + ",".join(repr(x) for x in p.points)
    raise TypeError(f"not a hyperspace point: {type(p).__name__}")


def parse_point(text: str, k: int = None):
    text = text.strip()
    if text == "S1":
        return FullCircle()
    tag, _, rest = text.partition(":")
    if tag == "I":
        lo, hi = rest.split(":")
        return IntervalPt(float(lo), float(hi))
    if tag == "A":
        start, end = rest.split(":")
        return ArcPt(float(start), float(end))
    if tag == "F":
        pts = [float(x) for x in rest.split(",")]
        return FinitePt.of(pts, k=k if k is not None else len(pts))
    raise ValueError(f"cannot parse hyperspace point {text!r}")


def save_cloud(cloud: SampleCloud, path):
    with open(path, "w") as fh:
        fh.write("kind,resolution,point\n")
        for p in cloud.points:
            fh.write(f"{cloud.kind},{cloud.resolution!r},{serialize_point(p)}\n")


def load_cloud(path) -> SampleCloud:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "kind,resolution,point":
            raise ValueError(f"unexpected cloud CSV header {header!r}")
        kind = None
        resolution = None
        pts = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            k_, r_, p_ = line.split(",", 2)
            kind = k_
            resolution = float(r_)
            pts.append(parse_point(p_))
    if not pts:
        raise ValueError("empty cloud file")
    return SampleCloud(kind, resolution, pts)
