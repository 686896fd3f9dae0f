"""Piecewise-linear homeomorphisms of the interval and the circle.

Maps are stored as exact rational breakpoints of a lift.  On the interval
the lift is the map itself; on the circle the breakpoints describe a
degree +/-1 lift G with G(x+1) = G(x) +/- 1 and the map is G reduced
mod 1.  Exact arithmetic keeps inverses and fixed points free of drift;
bulk evaluation goes through cached float arrays and ``np.interp``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

__all__ = [
    "Space",
    "Orientation",
    "Homeo1D",
    "OrbitLimit",
    "Violation",
    "ConvergenceError",
    "parse_coordinate",
    "map_from_json",
    "map_to_json",
    "pl_approx",
]

DEFAULT_TOL = 1e-9
DEFAULT_HORIZON = 1 << 12


class Space(enum.Enum):
    INTERVAL = "interval"
    CIRCLE = "circle"


class Orientation(enum.Enum):
    PRESERVING = "preserving"
    REVERSING = "reversing"


@dataclass(frozen=True)
class Violation:
    """One invariant failure, pointing at the breakpoint or segment at fault."""

    code: str
    where: str
    detail: str

    def __str__(self):
        return f"{self.code} at {self.where}: {self.detail}"


@dataclass(frozen=True)
class OrbitLimit:
    """Forward and backward limit fixed points of one orbit."""

    forward: float
    backward: float


class ConvergenceError(RuntimeError):
    """Orbit did not settle near a fixed point within the horizon."""


def _drop_collinear(pts: tuple) -> tuple:
    """Canonical form: remove interior breakpoints that do not bend the graph."""
    if len(pts) <= 2:
        return pts
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        (x0, y0), (x1, y1), (x2, y2) = out[-1], pts[i], pts[i + 1]
        if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
            out.append(pts[i])
    out.append(pts[-1])
    return tuple(out)


def parse_coordinate(value) -> Fraction:
    """Parse a coordinate from a decimal string, int, Fraction or float.

    Decimal strings ("0.25") and dyadic fraction strings ("3/8") are exact.
    Floats go through their shortest decimal repr, so a literal like 0.1
    means one tenth, not the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        value = repr(float(value))
    if isinstance(value, str):
        txt = value.strip()
        if "/" in txt:
            num, den = txt.split("/", 1)
            d = int(den)
            if d <= 0 or (d & (d - 1)) != 0:
                raise ValueError(
                    f"fraction denominator must be a power of 2, got {txt!r}")
            return Fraction(int(num), d)
        try:
            return Fraction(txt)
        except ValueError:
            raise ValueError(f"cannot parse coordinate {value!r}") from None
    raise TypeError(f"cannot parse coordinate of type {type(value).__name__}")


@dataclass(frozen=True)
class Homeo1D:
    """A PL homeomorphism given by exact breakpoints of its lift."""

    space: Space
    orientation: Orientation
    breakpoints: tuple  # ((Fraction x, Fraction y), ...) strictly increasing in x

    # -- construction ------------------------------------------------------

    @staticmethod
    def from_breakpoints(space, breakpoints, orientation=None) -> "Homeo1D":
        """Build from (x, y) pairs; coordinates parsed via parse_coordinate.

        Circle maps may give y either as the lift (endpoint gap +/-1) or
        reduced mod 1 with the final y equal to the first; the lift is
        reconstructed in the second case.
        """
        pts = tuple((parse_coordinate(x), parse_coordinate(y)) for x, y in breakpoints)
        if len(pts) < 2:
            raise ValueError("need at least two breakpoints")
        if orientation is None:
            orientation = (Orientation.PRESERVING if pts[-1][1] > pts[0][1]
                           else Orientation.REVERSING)
        if space is Space.CIRCLE:
            gap = pts[-1][1] - pts[0][1]
            want = 1 if orientation is Orientation.PRESERVING else -1
            if gap == 0:
                # reduced-mod-1 input: close the lift at the final breakpoint
                pts = pts[:-1] + ((pts[-1][0], pts[-1][1] + want),)
            # canonical lift: first y in [0, 1)
            shift = pts[0][1] - (pts[0][1] % 1)
            if shift != 0:
                pts = tuple((x, y - shift) for x, y in pts)
        return Homeo1D(space=space, orientation=orientation,
                       breakpoints=_drop_collinear(pts))

    @staticmethod
    def interval(breakpoints, orientation=None) -> "Homeo1D":
        return Homeo1D.from_breakpoints(Space.INTERVAL, breakpoints, orientation)

    @staticmethod
    def circle(breakpoints, orientation=None) -> "Homeo1D":
        return Homeo1D.from_breakpoints(Space.CIRCLE, breakpoints, orientation)

    # -- cached float views --------------------------------------------------

    @cached_property
    def _xs(self) -> np.ndarray:
        return np.array([float(x) for x, _ in self.breakpoints])

    @cached_property
    def _ys(self) -> np.ndarray:
        return np.array([float(y) for _, y in self.breakpoints])

    # -- validation ----------------------------------------------------------

    def validate(self) -> list:
        """Check every structural invariant; return violations (empty = ok)."""
        out = []
        pts = self.breakpoints
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if xs[0] != 0 or xs[-1] != 1:
            out.append(Violation("bad-domain", f"x[0]={xs[0]}, x[-1]={xs[-1]}",
                                 "breakpoint x-range must be exactly [0, 1]"))
        for i in range(len(xs) - 1):
            if xs[i + 1] <= xs[i]:
                out.append(Violation("not-strictly-increasing-x", f"breakpoint {i + 1}",
                                     f"x[{i + 1}]={xs[i + 1]} <= x[{i}]={xs[i]}"))
        increasing = self.orientation is Orientation.PRESERVING
        for i in range(len(ys) - 1):
            ok = ys[i + 1] > ys[i] if increasing else ys[i + 1] < ys[i]
            if not ok:
                kind = "not monotone increasing" if increasing else "not monotone decreasing"
                out.append(Violation("not-monotone", f"segment {i}", kind))
        if self.space is Space.INTERVAL:
            lo, hi = (0, 1) if increasing else (1, 0)
            if ys[0] != lo or ys[-1] != hi:
                out.append(Violation("bad-range", f"y[0]={ys[0]}, y[-1]={ys[-1]}",
                                     "interval map must fix the endpoint set"))
        else:
            want = 1 if increasing else -1
            if ys[-1] - ys[0] != want:
                out.append(Violation("bad-lift", f"y[-1]-y[0]={ys[-1] - ys[0]}",
                                     f"circle lift must change by exactly {want} over [0,1]"))
        # finite fixed set: no segment may sit on the diagonal (mod 1 on S^1)
        if not out:
            for i in range(len(pts) - 1):
                (x0, y0), (x1, y1) = pts[i], pts[i + 1]
                if y1 - y0 == x1 - x0:
                    off = y0 - x0
                    on_diag = (off == 0) if self.space is Space.INTERVAL \
                        else (off.denominator == 1)
                    if on_diag:
                        out.append(Violation(
                            "non-finite fixed set", f"segment {i} [{x0},{x1}]",
                            "segment lies on the diagonal"))
        return out

    def require_valid(self):
        bad = self.validate()
        if bad:
            raise ValueError("invalid map: " + "; ".join(str(v) for v in bad))

    # -- evaluation ----------------------------------------------------------

    def lift(self, x):
        """Lift value G(x) at points of [0, 1] (vectorized)."""
        arr = np.asarray(x, dtype=float)
        val = np.interp(arr, self._xs, self._ys)
        return val if arr.shape else float(val)

    def __call__(self, x):
        return self.eval(x)

    def eval(self, x):
        """Apply the map to a point or array of points of the space."""
        arr = np.asarray(x, dtype=float)
        if self.space is Space.INTERVAL:
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError("point outside [0, 1]")
            val = self.lift(arr)
        else:
            val = np.mod(self.lift(np.mod(arr, 1.0)), 1.0)
        return val if arr.shape else float(val)

    def lift_exact(self, x) -> Fraction:
        x = parse_coordinate(x)
        pts = self.breakpoints
        for i in range(len(pts) - 1):
            (x0, y0), (x1, y1) = pts[i], pts[i + 1]
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        raise ValueError(f"point {x} outside [0, 1]")

    def eval_exact(self, x) -> Fraction:
        """Exact image of a rational point (circle results reduced to [0,1))."""
        x = parse_coordinate(x)
        if self.space is Space.CIRCLE:
            return self.lift_exact(x % 1) % 1
        if not 0 <= x <= 1:
            raise ValueError("point outside [0, 1]")
        return self.lift_exact(x)

    # -- algebra -------------------------------------------------------------

    @cached_property
    def inverse(self) -> "Homeo1D":
        """Exact inverse (breakpoint swap, rebased to [0, 1] on the circle)."""
        pts = self.breakpoints
        if self.space is Space.INTERVAL:
            swapped = sorted(((y, x) for x, y in pts))
            return Homeo1D(self.space, self.orientation, _drop_collinear(tuple(swapped)))
        preserving = self.orientation is Orientation.PRESERVING
        y0 = pts[0][1]
        if preserving and y0 == 0:
            return Homeo1D.from_breakpoints(
                Space.CIRCLE, tuple((y, x) for x, y in pts), self.orientation)
        # The swapped graph covers a unit y-window not anchored at 0: cut it
        # at integer height and wrap, so the inverse's domain is [0, 1].
        cut = Fraction(1) if preserving else Fraction(0)
        xstar = None
        for (x0, v0), (x1, v1) in zip(pts, pts[1:]):
            lo, hi = (v0, v1) if v0 <= v1 else (v1, v0)
            if lo <= cut <= hi:
                xstar = x0 + (x1 - x0) * (cut - v0) / (v1 - v0)
                break
        out = [(Fraction(0), xstar)]
        if preserving:
            out += [(y - 1, x) for x, y in pts if 1 < y < y0 + 1]
            out += [(y, x + 1) for x, y in pts if y0 <= y < 1]
            out += [(Fraction(1), xstar + 1)]
        else:
            out += [(y, x) for x, y in pts if 0 < y <= y0]
            out += [(y + 1, x - 1) for x, y in pts if y0 - 1 < y < 0]
            out += [(Fraction(1), xstar - 1)]
        out = sorted(set(out))
        return Homeo1D.from_breakpoints(Space.CIRCLE, out, self.orientation)

    def iterate(self, x, n: int):
        """n-th iterate of a point or array; negative n uses the inverse."""
        arr = np.asarray(x, dtype=float)
        f = self if n >= 0 else self.inverse
        val = arr.copy()
        for _ in range(abs(n)):
            val = f.eval(val)
        return val if arr.shape else float(val)

    @property
    def degree(self) -> int:
        if self.space is Space.INTERVAL:
            return 1 if self.orientation is Orientation.PRESERVING else -1
        return int(self.breakpoints[-1][1] - self.breakpoints[0][1])

    def compose(self, other: "Homeo1D") -> "Homeo1D":
        """Exact composition self o other on the same space."""
        if self.space is not other.space:
            raise ValueError("cannot compose maps on different spaces")
        orient = (Orientation.PRESERVING
                  if self.orientation is other.orientation else Orientation.REVERSING)
        inv = other.inverse
        knots = {x for x, _ in other.breakpoints}
        for x, _ in self.breakpoints:
            pre = inv.eval_exact(x)
            knots.add(pre % 1 if self.space is Space.CIRCLE else pre)
        knots = sorted(knots | {Fraction(0), Fraction(1)})
        if self.space is Space.INTERVAL:
            pts = [(x, self.eval_exact(other.eval_exact(x))) for x in knots]
            return Homeo1D(Space.INTERVAL, orient, _drop_collinear(tuple(pts)))
        pts = []
        for x in knots:
            u = other.lift_exact(x)
            k = u - (u % 1)
            pts.append((x, self.lift_exact(u % 1) + k * self.degree))
        return Homeo1D.from_breakpoints(Space.CIRCLE, pts, orient)

    def power(self, m: int) -> "Homeo1D":
        """The PL map f^m with exact breakpoints (m >= 1)."""
        if m < 1:
            raise ValueError("power must be >= 1")
        g = self
        for _ in range(m - 1):
            g = self.compose(g)
        return g

    # -- fixed points ----------------------------------------------------------

    def fixed_points_exact(self) -> list:
        """All solutions of f(x) = x as exact Fractions (circle: in [0,1))."""
        sols = set()
        pts = self.breakpoints
        for i in range(len(pts) - 1):
            (x0, y0), (x1, y1) = pts[i], pts[i + 1]
            a = (y1 - y0) / (x1 - x0)
            if a == 1:
                continue  # parallel to the diagonal; overlap is a validation error
            b = y0 - a * x0
            if self.space is Space.INTERVAL:
                targets = [Fraction(0)]
            else:
                lo, hi = sorted((y0 - x0, y1 - x1))
                targets = [Fraction(k)
                           for k in range(int(np.floor(float(lo))) - 1,
                                          int(np.ceil(float(hi))) + 2)
                           if lo <= k <= hi]
            for k in targets:
                x = (k - b) / (a - 1)
                if x0 <= x <= x1:
                    sols.add(x % 1 if self.space is Space.CIRCLE else x)
        return sorted(sols)

    def fixed_points(self) -> np.ndarray:
        return np.array([float(p) for p in self.fixed_points_exact()])

    def wandering_intervals(self) -> list:
        """Closed intervals between consecutive fixed points (exact endpoints).

        On the circle the last pair wraps around through 1 = 0.
        """
        fix = self.fixed_points_exact()
        if self.space is Space.INTERVAL:
            return [(fix[i], fix[i + 1]) for i in range(len(fix) - 1)]
        return [(fix[i], fix[(i + 1) % len(fix)] + (1 if i == len(fix) - 1 else 0))
                for i in range(len(fix))]

    def local_slopes(self, p) -> tuple:
        """Exact (left, right) lift slopes at a point (circle: one-sided wrap)."""
        p = parse_coordinate(p)
        pts = self.breakpoints
        slopes = [(x0, x1, (y1 - y0) / (x1 - x0))
                  for (x0, y0), (x1, y1) in zip(pts, pts[1:])]
        left = right = None
        for x0, x1, a in slopes:
            if x0 < p <= x1:
                left = a
            if x0 <= p < x1:
                right = a
        if self.space is Space.CIRCLE:
            if p == 0:
                left = slopes[-1][2]
            right = right if right is not None else slopes[0][2]
        return left, right

    # -- orbit limits ------------------------------------------------------------

    def dist(self, x, y):
        """The space's metric, vectorized."""
        d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        if self.space is Space.CIRCLE:
            d = np.minimum(d, 1.0 - d)
        return d if d.shape else float(d)

    def orbit_limits(self, x, tol: float = DEFAULT_TOL,
                     horizon: int = DEFAULT_HORIZON) -> OrbitLimit:
        """Match the forward and backward orbit of x to fixed points."""
        fix = self.fixed_points()
        if len(fix) == 0:
            raise ConvergenceError("map has no fixed points")
        out = []
        for f in (self, self.inverse):
            p = float(x)
            steps = 0
            while np.min(self.dist(p, fix)) >= tol and steps < horizon:
                p = f.eval(p)
                steps += 1
            d = self.dist(p, fix)
            if np.min(d) >= tol:
                raise ConvergenceError(
                    f"orbit of {x} not within {tol} of a fixed point after {horizon} steps")
            out.append(float(fix[int(np.argmin(d))]))
        return OrbitLimit(forward=out[0], backward=out[1])

    # -- misc ----------------------------------------------------------------

    def restrict(self, lo, hi) -> "Homeo1D":
        """Restriction to an invariant interval [lo, hi], rescaled to [0, 1].

        Both endpoints must be fixed points; the result is conjugate to
        f|[lo,hi] by the affine change of coordinates.
        """
        lo, hi = parse_coordinate(lo), parse_coordinate(hi)
        if self.space is not Space.INTERVAL:
            raise ValueError("restrict applies to interval maps")
        if self.eval_exact(lo) != lo or self.eval_exact(hi) != hi:
            raise ValueError("restriction endpoints must be fixed")
        w = hi - lo
        knots = sorted({lo, hi} | {x for x, _ in self.breakpoints if lo < x < hi})
        pts = [((x - lo) / w, (self.eval_exact(x) - lo) / w) for x in knots]
        return Homeo1D(Space.INTERVAL, self.orientation, _drop_collinear(tuple(pts)))

    def __repr__(self):
        bp = ", ".join(f"({float(x):g},{float(y):g})" for x, y in self.breakpoints)
        return f"Homeo1D({self.space.value}, {self.orientation.value}, [{bp}])"


# -- module-level operation aliases (contract surface) -------------------------

def validate(f: Homeo1D) -> list:
    return f.validate()


def evaluate(f: Homeo1D, x):
    return f.eval(x)


def invert(f: Homeo1D) -> Homeo1D:
    return f.inverse


def iterate(f: Homeo1D, x, n: int):
    return f.iterate(x, n)


def fixed_points(f: Homeo1D) -> np.ndarray:
    return f.fixed_points()


def orbit_limits(f: Homeo1D, x, tol: float = DEFAULT_TOL,
                 horizon: int = DEFAULT_HORIZON) -> OrbitLimit:
    return f.orbit_limits(x, tol=tol, horizon=horizon)


# -- JSON interchange ----------------------------------------------------------

def map_from_json(doc) -> Homeo1D:
    """Build a map from its JSON description.

    { "space": "interval"|"circle", "orientation": "preserving"|"reversing",
      "breakpoints": [[x, y], ...] } with coordinates as decimal strings.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        space = Space(doc["space"])
        orientation = Orientation(doc["orientation"]) if "orientation" in doc else None
        breakpoints = doc["breakpoints"]
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad map description: {exc}") from None
    return Homeo1D.from_breakpoints(space, breakpoints, orientation)


def map_to_json(f: Homeo1D) -> dict:
    return {
        "space": f.space.value,
        "orientation": f.orientation.value,
        "breakpoints": [[str(x), str(y)] for x, y in f.breakpoints],
    }


def pl_approx(fn, knots, space=Space.INTERVAL) -> Homeo1D:
    """PL interpolation of a monotone function sampled at the given knots."""
    pts = [(parse_coordinate(x), parse_coordinate(fn(float(x)))) for x in knots]
    return Homeo1D.from_breakpoints(space, pts)
