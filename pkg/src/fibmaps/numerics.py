"""Precision handling, real intervals, polylines and planar point-set geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from scipy.spatial.distance import directed_hausdorff as _scipy_directed_hausdorff

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class PrecisionContext:
    """Run-wide arithmetic settings.

    ``bits`` is the mantissa precision used for every real orbit computation;
    all arithmetic on multi-precision values must happen inside ``local()``.
    """

    bits: int = 128
    escape_radius: float = 2.0
    max_iters: int = 20000

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 53:
            raise ValueError(f"bits must be an integer >= 53, got {self.bits}")
        if not self.escape_radius >= 2.0:
            raise ValueError("escape_radius must be >= 2")
        if int(self.max_iters) != self.max_iters or self.max_iters <= 0:
            raise ValueError("max_iters must be a positive integer")

    def local(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits)

    def real(self, value) -> gmpy2.mpfr:
        with self.local():
            return gmpy2.mpfr(value)

    @property
    def unit_roundoff(self) -> float:
        return 2.0 ** (1 - self.bits)

    @property
    def parameter_tolerance(self) -> float:
        return 2.0 ** (-(self.bits // 2))


def golden(ctx: PrecisionContext | None = None):
    """The constant a = (1 + sqrt 5)/2, at ``ctx`` precision when given."""
    if ctx is None:
        return GOLDEN
    with ctx.local():
        return (1 + gmpy2.sqrt(gmpy2.mpfr(5))) / 2


@dataclass(frozen=True)
class RealInterval:
    lo: object
    hi: object

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self):
        return self.hi - self.lo

    @property
    def center(self):
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo < x < self.hi

    def contains_interval(self, other: "RealInterval", strict: bool = False) -> bool:
        if strict:
            return self.lo < other.lo and other.hi < self.hi
        return self.lo <= other.lo and other.hi <= self.hi

    def disjoint(self, other: "RealInterval") -> bool:
        return self.hi <= other.lo or other.hi <= self.lo

    def scaled(self, factor) -> "RealInterval":
        """Concentric interval with length multiplied by ``factor``."""
        half = self.length * factor / 2
        return RealInterval(self.center - half, self.center + half)

    def as_floats(self) -> tuple[float, float]:
        return float(self.lo), float(self.hi)


@dataclass(frozen=True, eq=False)
class Polyline:
    """Ordered complex vertices with a boundary parametrization in [0, 1)."""

    points: np.ndarray
    closed: bool = True
    params: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        if self.params is None:
            params = np.arange(len(pts)) / max(len(pts), 1)
        else:
            params = np.asarray(self.params, dtype=float).ravel()
        if len(params) != len(pts):
            raise ValueError("points and params differ in length")
        if self.closed and len(pts) < 3:
            raise ValueError("a closed polyline needs at least 3 points")
        if len(params) > 1 and not np.all(np.diff(params) > 0):
            raise ValueError("params must be strictly increasing")
        if len(params) and (params[0] < 0 or params[-1] >= 1):
            raise ValueError("params must lie in [0, 1)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "params", params)

    def __len__(self) -> int:
        return len(self.points)

    def edge_vectors(self) -> np.ndarray:
        if self.closed:
            return np.roll(self.points, -1) - self.points
        return np.diff(self.points)

    def edge_lengths(self) -> np.ndarray:
        return np.abs(self.edge_vectors())

    @property
    def length(self) -> float:
        return float(self.edge_lengths().sum())

    @property
    def diameter(self) -> float:
        pts = self.points
        # the diameter is attained on the convex hull; hull of a closed curve is small
        if len(pts) > 3:
            from scipy.spatial import ConvexHull

            xy = np.c_[pts.real, pts.imag]
            try:
                pts = pts[ConvexHull(xy).vertices]
            except Exception:
                pass
        return float(np.abs(pts[:, None] - pts[None, :]).max())

    def transformed(self, scale: complex = 1.0, shift: complex = 0.0) -> "Polyline":
        return Polyline(self.points * scale + shift, self.closed, self.params)

    def resample(self, npts: int) -> np.ndarray:
        """``npts`` points equally spaced in arc length."""
        pts = np.append(self.points, self.points[0]) if self.closed else self.points
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
        u = np.linspace(0.0, s[-1], npts, endpoint=not self.closed)
        return np.interp(u, s, pts.real) + 1j * np.interp(u, s, pts.imag)


def refine_polyline(p: Polyline, max_edge: float) -> Polyline:
    """Insert linearly interpolated vertices until every edge is at most ``max_edge``."""
    if not max_edge > 0:
        raise ValueError("max_edge must be positive")
    lengths = p.edge_lengths()
    counts = np.maximum(np.ceil(lengths / max_edge).astype(int), 1)
    if np.all(counts == 1):
        return p
    start = p.points
    end = np.roll(p.points, -1) if p.closed else p.points[1:]
    pstart = p.params
    pend = np.append(p.params[1:], 1.0) if p.closed else p.params[1:]
    pts, prm = [], []
    for i in range(len(end)):
        k = counts[i]
        frac = np.arange(k) / k
        pts.append(start[i] + frac * (end[i] - start[i]))
        prm.append(pstart[i] + frac * (pend[i] - pstart[i]))
    if not p.closed:
        pts.append(p.points[-1:])
        prm.append(p.params[-1:])
    return Polyline(np.concatenate(pts), p.closed, np.concatenate(prm))


def _as_xy(points) -> np.ndarray:
    arr = np.asarray(points)
    if np.iscomplexobj(arr) or arr.ndim == 1:
        arr = np.asarray(arr, dtype=complex).ravel()
        return np.c_[arr.real, arr.imag]
    return np.asarray(arr, dtype=float).reshape(len(arr), -1)


def directed_hausdorff(a, b) -> float:
    """sup over x in a of dist(x, b)."""
    xa, xb = _as_xy(a), _as_xy(b)
    if len(xa) == 0 or len(xb) == 0:
        raise ValueError("empty set")
    # early-break exact algorithm; seed 0 fixes its internal shuffle
    return float(_scipy_directed_hausdorff(xa, xb, seed=0)[0])


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between finite planar point sets.

    Points are given as complex arrays or as (n, 2) real arrays.
    """
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def winding_numbers(polygon: np.ndarray, z: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Winding number of the closed vertex loop ``polygon`` around each point of ``z``."""
    v = np.asarray(polygon, dtype=complex).ravel()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    v0, v1 = v, np.roll(v, -1)
    out = np.zeros(len(z), dtype=int)
    for s in range(0, len(z), chunk):
        zz = z[s:s + chunk, None]
        y0 = v0.imag[None, :] - zz.imag
        y1 = v1.imag[None, :] - zz.imag
        cross = (v1.real - v0.real)[None, :] * y0 - (v0.real[None, :] - zz.real) * (v1.imag - v0.imag)[None, :]
        # cross is the signed area of (edge, point); its sign says left/right
        up = (y0 <= 0) & (y1 > 0) & (cross < 0)
        down = (y0 > 0) & (y1 <= 0) & (cross > 0)
        out[s:s + chunk] = up.sum(axis=1) - down.sum(axis=1)
    return out


def contains_points(polyline: Polyline, z) -> np.ndarray:
    return winding_numbers(polyline.points, z) != 0


def real_axis_crossings(polyline: Polyline) -> np.ndarray:
    """Sorted real coordinates where a closed polyline meets the real line."""
    p = polyline.points
    q = np.roll(p, -1)
    hits = list(p.real[p.imag == 0])
    mask = (p.imag * q.imag) < 0
    s = p.imag[mask] / (p.imag[mask] - q.imag[mask])
    hits.extend(p.real[mask] + s * (q.real[mask] - p.real[mask]))
    return np.sort(np.asarray(hits, dtype=float))
