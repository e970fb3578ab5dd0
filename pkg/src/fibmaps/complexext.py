"""Complex extensions, disk pull-backs, puzzle pieces and the Julia set of z^2 + c.

Pieces are stored as float offsets from a multi-precision real anchor on the
critical orbit.  Every inverse step is computed in offset form, so deep pieces
keep full relative accuracy even when they are far below double resolution in
absolute coordinates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy import integrate

from .errors import CriticalCollision, DisjointnessViolated, QuadratureError
from .numerics import (
    GOLDEN,
    Polyline,
    RealInterval,
    directed_hausdorff,
    real_axis_crossings,
    winding_numbers,
)
from .renorm import Hierarchy, _inverse_branch, _pull_back
from .unimodal import UnimodalMap

AB_RTOL = 1e-12
MAX_COLLISION_RETRIES = 5


# ---------------------------------------------------------------- extensions

def ab_extend(h, z, rtol: float = AB_RTOL) -> complex:
    """Ahlfors-Beurling extension of a real function h at z = x + iy.

    Written with u in [0, 1]: the real part averages h(x +- uy), the imaginary
    part integrates their difference.  Conjugation symmetry holds for y < 0.
    """
    if not rtol >= 50 * np.finfo(float).eps:
        raise ValueError("rtol must be at least 50 machine epsilons")
    z = complex(z)
    x, y = z.real, z.imag
    if y == 0:
        return complex(h(x))

    def run(fn):
        # non-convergence is reported through QuadratureError, not a warning
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(fn, 0.0, 1.0, epsabs=0.0, epsrel=rtol, limit=200)
        if err > max(rtol * abs(val), 1e-15):
            raise QuadratureError(err / max(abs(val), 1e-300), rtol)
        return val

    re = run(lambda u: 0.5 * (h(x + u * y) + h(x - u * y)))
    im = run(lambda u: h(x + u * y) - h(x - u * y))
    return complex(re, im)


def wirtinger(F, z, step: float | None = None) -> tuple[complex, complex]:
    """(dF/dz, dF/dzbar) by central differences."""
    z = complex(z)
    d = step if step is not None else 1e-3 * max(abs(z.imag), 1e-6)
    fx = (F(z + d) - F(z - d)) / (2 * d)
    fy = (F(z + 1j * d) - F(z - 1j * d)) / (2 * d)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


def beltrami_ratio(h, z, step: float | None = None) -> float:
    """|dbar h^ / d h^| for the Ahlfors-Beurling extension of h."""
    dz, dzb = wirtinger(lambda w: ab_extend(h, w), z, step)
    return abs(dzb) / abs(dz)


class ComplexExtension:
    """A unimodal map continued to the plane.

    ``exact`` uses the polynomial h itself (holomorphic); ``ahlfors_beurling``
    uses the quadrature extension of h, which is only asymptotically conformal
    near the real line.
    """

    MODES = ("exact", "ahlfors_beurling")

    def __init__(self, f: UnimodalMap, mode: str = "exact"):
        if mode not in self.MODES:
            raise ValueError(f"unknown extension mode {mode!r}")
        self.f = f
        self.mode = mode
        self._hf = f.h.as_float_function()
        self._c = float(f.c)

    def h_hat(self, y):
        if self.mode == "exact":
            return self._hf(np.asarray(y, dtype=complex))
        y = np.atleast_1d(np.asarray(y, dtype=complex))
        return np.array([ab_extend(self._hf, v) for v in y])

    def __call__(self, z):
        u = np.asarray(z, dtype=complex) - self._c
        return self.h_hat(u * u)

    def delta_inverse(self, y0: float, dw) -> np.ndarray:
        """dy with h^(y0 + dy) - h(y0) = dw."""
        if self.mode == "exact":
            return self.f.h.delta_inverse(y0, dw)
        dw = np.atleast_1d(np.asarray(dw, dtype=complex))
        base = float(self._hf(y0))
        d1 = float(self.f.h.taylor(y0)[0])
        out = np.empty_like(dw)
        for i, target in enumerate(dw):
            dy = target / d1
            for _ in range(30):
                val = ab_extend(self._hf, y0 + dy) - base - target
                scale = max(abs(dy), 1e-12)
                dz, dzb = wirtinger(lambda w: ab_extend(self._hf, w), y0 + dy, 1e-4 * scale)
                # solve dz*e + dzb*conj(e) = -val for e
                det = abs(dz) ** 2 - abs(dzb) ** 2
                e = (np.conj(dz) * (-val) - dzb * np.conj(-val)) / det
                dy += e
                if abs(e) <= 1e-13 * scale:
                    break
            out[i] = dy
        return out


# ------------------------------------------------------------- theta domains

@dataclass(frozen=True)
class ThetaDomain:
    base: RealInterval
    theta: float = math.pi / 2

    def __post_init__(self):
        if not 0 < self.theta <= math.pi / 2:
            raise ValueError("theta must lie in (0, pi/2]")

    @property
    def apex_height(self) -> float:
        return float(self.base.length) / 2 * math.tan(self.theta / 2)


def theta_arc_offsets(half: float, theta: float, npts: int) -> np.ndarray:
    """Boundary of D_theta([-half, half]) as complex points, counter-clockwise from +half."""
    if npts < 8:
        raise ValueError("npts must be >= 8")
    k = npts // 2
    centre_y = -half / math.tan(theta) if theta < math.pi / 2 else 0.0
    radius = half / math.sin(theta)
    phi = np.linspace(math.pi / 2 - theta, math.pi / 2 + theta, k, endpoint=False)
    upper = 1j * centre_y + radius * np.exp(1j * phi)
    # the left end point closes the upper arc; the lower arc is its mirror image
    upper = np.append(upper, -half + 0j)
    upper.real[0], upper.imag[0] = half, 0.0
    lower = np.conj(upper[1:-1])[::-1]
    pts = np.concatenate([upper, lower])
    return pts


def theta_boundary(d: ThetaDomain, npts: int = 360) -> Polyline:
    half = float(d.base.length) / 2
    centre = float(d.base.center)
    return Polyline(theta_arc_offsets(half, d.theta, npts) + centre, closed=True)


# ------------------------------------------------------------------- pieces

@dataclass(frozen=True, eq=False)
class PuzzlePiece:
    """A closed curve stored as offsets from a real anchor, with its real trace."""

    offsets: Polyline
    anchor: object
    base: RealInterval
    level: int

    @property
    def boundary(self) -> Polyline:
        """Absolute coordinates (double precision)."""
        return self.offsets.transformed(1.0, float(self.anchor))

    @property
    def diameter(self) -> float:
        return self.offsets.diameter

    def asymmetry(self) -> float:
        """Distance from the curve to its mirror image."""
        pts = self.offsets.points
        return directed_hausdorff(np.conj(pts), pts)

    def real_trace(self) -> tuple[float, float]:
        """Extreme real crossings, relative to the anchor."""
        x = real_axis_crossings(self.offsets)
        return float(x[0]), float(x[-1])


def _precision_of(*xs) -> int:
    return max([getattr(x, "precision", 53) for x in xs] + [53])


def _mp_float(fn, *xs) -> float:
    """float(fn(*xs)) evaluated at the widest precision among the operands."""
    with gmpy2.context(gmpy2.get_context(), precision=_precision_of(*xs)):
        return float(fn(*xs))


def disk_piece(base: RealInterval, anchor, level: int, npts: int = 512, theta: float = math.pi / 2) -> PuzzlePiece:
    """D_theta(base) as a piece anchored at ``anchor``."""
    shift = _mp_float(lambda lo, hi, a: (lo + hi) / 2 - a, base.lo, base.hi, anchor)
    half = _mp_float(lambda lo, hi: (hi - lo) / 2, base.lo, base.hi)
    pts = theta_arc_offsets(half, theta, npts) + shift
    return PuzzlePiece(Polyline(pts, closed=True), anchor, base, level)


@dataclass(frozen=True)
class Itinerary:
    """Real orbit points x_0 -> x_1 -> ... -> x_p along which pieces are pulled back.

    The pull-back folds at x_0 when x_0 is the critical point.
    """

    points: tuple

    @property
    def length(self) -> int:
        return len(self.points) - 1


def central_itinerary(hier: Hierarchy, n: int) -> Itinerary:
    r = hier[n].time_central
    return Itinerary(tuple(hier.orbit.values[: r + 1]))


def side_itinerary(hier: Hierarchy, n: int) -> Itinerary:
    lv = hier[n]
    r, s = lv.time_central, lv.time_side
    return Itinerary(tuple(hier.orbit.values[r: r + s + 1]))


@dataclass
class PullbackStats:
    refinements: int = 0
    retries: int = 0
    branch_warnings: int = 0


def _pull_offsets(F: ComplexExtension, w: np.ndarray, params: np.ndarray, itin: Itinerary, stats: PullbackStats):
    """Offsets around x_p pulled back to offsets around x_0.  Returns (points, params)."""
    f = F.f
    ctx = f.ctx
    with ctx.local():
        us = [float(x - f.c) for x in itin.points]
        ys = [float((x - f.c) ** 2) for x in itin.points]
        fold = itin.points[0] == f.c
    for k in range(itin.length - 1, -1, -1):
        dy = F.delta_inverse(ys[k], w)
        if k == 0 and fold:
            scale = max(np.abs(dy).max(), 1e-300)
            if np.abs(dy).min() <= 1e-13 * scale:
                raise CriticalCollision("boundary point on the critical value")
            turns = np.round((np.unwrap(np.angle(np.append(dy, dy[0])))[-1] - np.angle(dy[0])) / (2 * np.pi))
            if abs(turns) != 1:
                raise CriticalCollision("curve does not surround the critical value once")
            arg = np.unwrap(np.angle(dy))
            w0 = np.sqrt(np.abs(dy)) * np.exp(0.5j * arg)
            return np.concatenate([w0, -w0]), np.concatenate([params / 2, 0.5 + params / 2])
        u = us[k]
        s = 1.0 if u > 0 else -1.0
        w = dy / (u + s * np.sqrt(u * u + dy + 0j))
        if np.any(s * (u + w).real <= 0):
            stats.branch_warnings += 1
    return w, params


def _subdivide(p: Polyline, mask: np.ndarray) -> Polyline:
    """Insert edge midpoints (in position and parameter) on the masked edges."""
    pts, prm = p.points, p.params
    nxt = np.roll(pts, -1)
    pn = np.append(prm[1:], 1.0)
    out_p, out_t = [], []
    for i in range(len(pts)):
        out_p.append(pts[i])
        out_t.append(prm[i])
        if mask[i]:
            out_p.append(0.5 * (pts[i] + nxt[i]))
            out_t.append(0.5 * (prm[i] + pn[i]))
    return Polyline(np.asarray(out_p), True, np.asarray(out_t))


def _thin(p: Polyline, max_points: int) -> Polyline:
    """Arc-length resampling down to ``max_points`` vertices."""
    if len(p) <= max_points:
        return p
    pts = np.append(p.points, p.points[0])
    prm = np.append(p.params, 1.0)
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
    u = np.linspace(0.0, s[-1], max_points, endpoint=False)
    new = np.interp(u, s, pts.real) + 1j * np.interp(u, s, pts.imag)
    t = np.interp(u, s, prm)
    keep = np.concatenate([[True], np.diff(t) > 0])
    return Polyline(new[keep], True, t[keep])


def _real_pull_back_base(f: UnimodalMap, base: RealInterval, itin: Itinerary) -> RealInterval:
    with f.ctx.local():
        lo, hi = base.lo, base.hi
        pts = itin.points
        for k in range(itin.length - 1, 0, -1):
            side = 1 if pts[k] > f.c else -1
            a, b = _inverse_branch(f, lo, side), _inverse_branch(f, hi, side)
            lo, hi = (a, b) if a < b else (b, a)
        if pts[0] == f.c:
            w = gmpy2.sqrt(f.h.inverse(hi))
            return RealInterval(f.c - w, f.c + w)
        side = 1 if pts[0] > f.c else -1
        a, b = _inverse_branch(f, lo, side), _inverse_branch(f, hi, side)
        return RealInterval(min(a, b), max(a, b))


def pull_back_piece(F: ComplexExtension, piece: PuzzlePiece, itin: Itinerary,
                    max_edge: float | None = None, max_points: int = 4000,
                    stats: PullbackStats | None = None) -> PuzzlePiece:
    """Pull ``piece`` (anchored near x_p) back along ``itin`` to a piece anchored at x_0.

    ``max_edge`` is relative to the new base length; source edges whose image
    edges are too long are subdivided and the pull-back is recomputed.
    """
    f = F.f
    stats = stats if stats is not None else PullbackStats()
    base = _real_pull_back_base(f, piece.base, itin)
    with f.ctx.local():
        shift = float(piece.anchor - itin.points[-1])
        width = float(base.length)
    limit = (max_edge if max_edge is not None else 0.01) * width
    src = piece.offsets
    for attempt in range(MAX_COLLISION_RETRIES + 1):
        try:
            for _ in range(12):
                pts, prm = _pull_offsets(F, src.points + shift, src.params, itin, stats)
                out = Polyline(pts, True, prm)
                long = out.edge_lengths() > limit
                if not long.any():
                    break
                n = len(src)
                mask = long[:n] | long[n:] if len(long) == 2 * n else long
                src = _subdivide(src, mask)
                stats.refinements += 1
            break
        except CriticalCollision:
            if attempt == MAX_COLLISION_RETRIES:
                raise
            stats.retries += 1
            # move every vertex a third of the way along its edge and try again
            nxt = np.roll(src.points, -1)
            pn = np.append(src.params[1:], 1.0)
            src = Polyline(src.points + (nxt - src.points) / 3, True, src.params + (pn - src.params) / 3)
    out = _thin(out, max_points)
    return PuzzlePiece(out, itin.points[0], base, piece.level + 1)


def forward_offsets(F: ComplexExtension, piece: PuzzlePiece, itin: Itinerary) -> np.ndarray:
    """Push the piece's boundary forward along ``itin``; offsets relative to x_p."""
    f = F.f
    with f.ctx.local():
        us = [float(x - f.c) for x in itin.points]
        ys = [float((x - f.c) ** 2) for x in itin.points]
        shift0 = float(piece.anchor - itin.points[0])
    w = piece.offsets.points + shift0
    for k in range(itin.length):
        u = us[k]
        dy = 2 * u * w + w * w
        w = f.h.delta(ys[k], dy)
    return w


# -------------------------------------------------------- puzzle hierarchy

def puzzle_hierarchy(F: ComplexExtension, hier: Hierarchy, m: int, N: int, npts: int = 1024,
                     max_edge: float = 0.01, max_points: int = 4000) -> list[PuzzlePiece]:
    """Delta^m = D(I^m), then Delta^n = central pull-back of Delta^{n-1} by g_n, up to N."""
    if not 1 <= m < N <= hier.depth:
        raise ValueError(f"need 1 <= m < N <= {hier.depth}")
    f = F.f
    pieces = [disk_piece(hier[m].I_central, f.c, m, npts)]
    for n in range(m + 1, N + 1):
        pieces.append(pull_back_piece(F, pieces[-1], central_itinerary(hier, n), max_edge, max_points))
    return pieces


def rescale_piece(piece: PuzzlePiece) -> Polyline:
    """Affine image with base [-a, a]."""
    b = piece.base
    half = _mp_float(lambda lo, hi: (hi - lo) / 2, b.lo, b.hi)
    shift = _mp_float(lambda a, lo, hi: a - (lo + hi) / 2, piece.anchor, b.lo, b.hi)
    return piece.offsets.transformed(GOLDEN / half, GOLDEN * shift / half)


# --------------------------------------------------------------- Julia set

def repelling_fixed_point(c: complex) -> complex:
    """The fixed point (1 + sqrt(1 - 4c))/2 of z^2 + c."""
    return (1 + np.sqrt(complex(1 - 4 * c))) / 2


def julia_set(c: complex = -1, mode: str = "inverse_iteration", budget: int = 100_000,
              seed: int = 0, burn_in: int = 40):
    """Julia set of z^2 + c.

    inverse_iteration: ``budget`` points, each a random preimage chain of the
    repelling fixed point.  escape_time: a vectorized membership test with
    escape radius 2 and ``budget`` iterations.
    """
    c = complex(c)
    if abs(c) > 2:
        raise ValueError("|c| must be <= 2")
    if mode == "escape_time":
        def member(z):
            z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
            inside = np.ones(z.shape, dtype=bool)
            for _ in range(budget):
                z[inside] = z[inside] ** 2 + c
                inside &= np.abs(z) <= 2
            return inside
        return member
    if mode != "inverse_iteration":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    chains = max(1, min(budget, 1000))
    steps = burn_in + -(-budget // chains)
    z = np.full(chains, repelling_fixed_point(c))
    out = []
    for i in range(steps):
        sign = np.where(rng.random(chains) < 0.5, 1.0, -1.0)
        z = sign * np.sqrt(z - c)
        if i >= burn_in:
            out.append(z.copy())
    return np.concatenate(out)[:budget]


@dataclass(frozen=True)
class Figure1Row:
    level: int
    hausdorff: float
    piece_to_julia: float
    julia_to_piece: float
    spacing: float
    diameter: float


@dataclass(frozen=True)
class Figure1Report:
    rows: list
    longest_decreasing_run: int

    @property
    def monotone(self) -> bool:
        return self.longest_decreasing_run >= 3

    @property
    def distances(self) -> list[float]:
        return [r.hausdorff for r in self.rows]


def figure1_report(pieces: list[tuple[int, Polyline]], julia: np.ndarray, samples: int = 100_000) -> Figure1Report:
    """Hausdorff distance from each rescaled piece boundary to the Julia point set."""
    if len(pieces) < 2:
        raise ValueError("need at least two levels")
    rows = []
    for level, poly in pieces:
        pts = poly.resample(samples)
        d1 = directed_hausdorff(pts, julia)
        d2 = directed_hausdorff(julia, pts)
        spacing = float(np.abs(np.diff(np.append(pts, pts[0]))).max())
        rows.append(Figure1Row(level, max(d1, d2), d1, d2, spacing, poly.diameter))
    best = run = 1
    for a, b in zip(rows, rows[1:]):
        run = run + 1 if b.hausdorff < a.hausdorff else 1
        best = max(best, run)
    return Figure1Report(rows, best)


# ------------------------------------------------- disk containment scaling

@dataclass(frozen=True)
class ScalingIncrement:
    n: int
    alpha: float
    beta: float
    mu: float
    cover_fraction: float

    @property
    def increment(self) -> float:
        return self.beta - self.alpha


def disk_scaling_increment(F: ComplexExtension, hier: Hierarchy, n: int, alpha: float = 0.5,
                           npts: int = 1024) -> ScalingIncrement:
    """Pull D(alpha-scaled I^n) back by the central branch of g_{n+1}; measure the smallest
    beta with the result inside D(beta-scaled I^{n+1})."""
    f = F.f
    if not 1 <= n < hier.depth:
        raise ValueError("level n+1 must be constructed")
    with f.ctx.local():
        big = hier[n].I_central.scaled(1 + mpfr(alpha))
    piece = disk_piece(big, f.c, n, npts)
    itin = central_itinerary(hier, n + 1)
    out = pull_back_piece(F, piece, itin, max_edge=0.005)
    with f.ctx.local():
        half_next = float(hier[n + 1].half_width)
        # real trace of the scaled disk at the critical value, and the fold image of I^{n+1}
        L = _pull_back(f, hier.orbit, big, itin.length, 1, n + 1)
        folded = f._raw(hier[n + 1].I_central.hi) - f.critical_value
        cover = float(folded / L.length)
    beta = float(np.abs(out.offsets.points).max()) / half_next - 1
    return ScalingIncrement(n, alpha, beta, hier[n + 1].mu, cover)


# ------------------------------------------------------ chord-arc diagnostic

@dataclass(frozen=True)
class ReturnDomain:
    interval: RealInterval
    time: int
    itinerary: Itinerary
    critical: bool


def return_domains(f: UnimodalMap, target: RealInterval, truncation: int = 16,
                   grid: int = 20000, max_time: int = 1000) -> list[ReturnDomain]:
    """The ``truncation`` largest components of the first-return map to ``target``.

    Components are discovered by a double-precision forward scan of a grid in
    ``target`` (points grouped by return time and side pattern) and then
    recomputed exactly by pulling ``target`` back along each side pattern.
    """
    with f.ctx.local():
        c = f.c
        lo, hi = float(target.lo - c), float(target.hi - c)
    hf = f.h.as_float_function()
    u = np.linspace(lo, hi, grid + 2)[1:-1]
    x = u.copy()
    times = np.zeros(grid, dtype=np.int64)
    code = np.zeros(grid, dtype=np.uint64)
    sides = []
    active = np.ones(grid, dtype=bool)
    for k in range(1, max_time + 1):
        sides.append(x >= 0)
        if k > 1:
            # mirror images share everything after the first step
            code[active] = code[active] * np.uint64(3) + (x[active] >= 0).astype(np.uint64) + np.uint64(1)
        x = np.where(active, hf(x * x) - float(c), x)
        ret = active & (x > lo) & (x < hi)
        times[ret] = k
        active &= ~ret
        if not active.any():
            break
    ok = times > 0
    cuts = np.flatnonzero((np.diff(times) != 0) | (np.diff(code) != 0) | ~ok[1:] | ~ok[:-1]) + 1
    groups = [g for g in np.split(np.arange(grid), cuts) if ok[g[0]]]
    # grid counts estimate component sizes; only the front-runners are resolved exactly
    groups.sort(key=len, reverse=True)
    groups = groups[: 2 * truncation + 1]
    found = []
    with f.ctx.local():
        for g in groups:
            mid = g[len(g) // 2]
            k = int(times[mid])
            pattern = [1 if sides[j][mid] else -1 for j in range(k)]
            critical = u[g[0]] < 0 < u[g[-1]]
            try:
                dom = _pull_back_by_pattern(f, target, pattern, critical)
            except ValueError:
                dom = None  # narrower than the working precision
            if dom is None:
                continue
            x0 = f.c if critical else dom.center
            pts = [x0]
            for _ in range(k):
                pts.append(f._raw(pts[-1]))
            found.append(ReturnDomain(dom, k, Itinerary(tuple(pts)), critical))
    found.sort(key=lambda d: -float(d.interval.length))
    found = found[:truncation]
    found.sort(key=lambda d: d.interval.lo)
    return found


def _pull_back_by_pattern(f: UnimodalMap, target: RealInterval, pattern, critical: bool):
    lo, hi = target.lo, target.hi
    for j in range(len(pattern) - 1, 0, -1):
        a, b = _inverse_branch(f, lo, pattern[j]), _inverse_branch(f, hi, pattern[j])
        if a is None or b is None:
            return None
        lo, hi = (a, b) if a < b else (b, a)
    if critical:
        w = gmpy2.sqrt(f.h.inverse(hi))
        return RealInterval(f.c - w, f.c + w)
    a, b = _inverse_branch(f, lo, pattern[0]), _inverse_branch(f, hi, pattern[0])
    if a is None or b is None:
        return None
    return RealInterval(min(a, b), max(a, b))


def _domain_piece(F: ComplexExtension, target: RealInterval, dom: ReturnDomain, npts: int) -> np.ndarray:
    """Absolute float boundary of the pull-back of D(target) onto the domain's interval."""
    f = F.f
    anchor = dom.itinerary.points[-1]
    disk = disk_piece(target, anchor, 0, npts)
    piece = pull_back_piece(F, disk, dom.itinerary, max_edge=0.02, max_points=npts * 2)
    with f.ctx.local():
        return piece.offsets.points + float(piece.anchor)


@dataclass(frozen=True)
class ChordArcResult:
    constant: float
    domains: int
    gamma: Polyline


def chord_arc_constant(points: np.ndarray, samples: int = 400) -> float:
    """max over vertex pairs of (shorter boundary arc) / chord for a closed curve."""
    pts = Polyline(points).resample(samples)
    seg = np.abs(np.diff(np.append(pts, pts[0])))
    s = np.concatenate([[0.0], np.cumsum(seg)])[:-1]
    total = seg.sum()
    arc = np.abs(s[:, None] - s[None, :])
    arc = np.minimum(arc, total - arc)
    chord = np.abs(pts[:, None] - pts[None, :])
    mask = chord > 1e-12 * total
    return float((arc[mask] / chord[mask]).max())


def gamma_curve(centre: float, half: float, disks: list[np.ndarray], npts: int = 512) -> np.ndarray:
    """Upper boundary of D(I) minus the given disks: real gaps, upper arcs, outer semicircle."""
    lo, hi = centre - half, centre + half
    spans = []
    for pts in disks:
        x = pts.real
        spans.append((x.min(), x.max(), pts))
    spans.sort(key=lambda t: t[0])
    path = [complex(lo, 0.0)]
    for a, b, pts in spans:
        path.append(complex(a, 0.0))
        up = pts[pts.imag >= 0]
        up = up[np.argsort(-np.angle(up - (a + b) / 2))]
        path.extend(up.tolist())
        path.append(complex(b, 0.0))
    path.append(complex(hi, 0.0))
    phi = np.linspace(0.0, math.pi, npts)[1:-1]
    path.extend((centre + half * np.exp(1j * phi)).tolist())
    return np.asarray(path)


def chord_arc_diagnostic(F: ComplexExtension, hier: Hierarchy, n: int, truncation: int = 8,
                         npts: int = 256, samples: int = 400) -> ChordArcResult:
    """Chord-arc constant of the upper part of D(I^n) with the return-domain pieces removed."""
    f = F.f
    target = hier[n].I_central
    doms = return_domains(f, target, truncation)
    disks = [_domain_piece(F, target, d, npts) for d in doms]
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            if (winding_numbers(disks[j], disks[i]) != 0).any() or (winding_numbers(disks[i], disks[j]) != 0).any():
                raise DisjointnessViolated(i, j)
    with f.ctx.local():
        centre, half = float(target.center), float(target.length / 2)
    gamma = gamma_curve(centre, half, disks, npts)
    const = chord_arc_constant(gamma, samples)
    return ChordArcResult(const, len(doms), Polyline(gamma))
