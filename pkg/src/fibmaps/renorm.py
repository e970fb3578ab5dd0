"""Nested central intervals, first-return maps and their rescalings."""

from __future__ import annotations

from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .errors import (
    CombinatoricsBroken,
    InsufficientPrecision,
    MultiplierNotFound,
    NotFibonacciRegime,
    OrbitEscaped,
)
from .numerics import GOLDEN, RealInterval, golden
from .unimodal import CriticalOrbit, UnimodalMap, critical_orbit, fibonacci_times

# orbit errors must stay this far below the interval they are tested against
RESOLUTION_MARGIN = 1e-3


@dataclass(frozen=True)
class RenormLevel:
    """One level of the hierarchy; level 0 carries only I^0."""

    n: int
    I_central: RealInterval
    I_side: RealInterval | None = None
    time_central: int = 0
    time_side: int = 0
    mu: float | None = None

    @property
    def half_width(self):
        return self.I_central.length / 2


def build_I0(f: UnimodalMap) -> RealInterval:
    """(alpha, alpha_hat): the c-symmetric interval bounded by the reversing fixed point."""
    alpha = f.alpha
    if alpha is None:
        raise NotFibonacciRegime("no orientation-reversing fixed point with f' < -1")
    with f.ctx.local():
        # alpha is fixed and alpha_hat maps onto it, so the boundary orbit is {alpha}
        resid = abs(f._raw(alpha) - alpha)
        if resid > 2 ** (-f.ctx.bits // 2):
            raise NotFibonacciRegime("fixed point did not converge")
        return RealInterval(alpha, 2 * f.c - alpha)


def _inverse_branch(f: UnimodalMap, y, side: int):
    """The preimage of y on the given side of c (side = +1 or -1)."""
    v = f.h.inverse(y)
    if v < 0:
        return None
    return f.c + side * gmpy2.sqrt(v)


def _pull_back(f: UnimodalMap, orbit: CriticalOrbit, target: RealInterval, stop: int, start: int, level: int):
    """Pull ``target`` (around orbit[stop]) back to the component around orbit[start], start >= 1.

    Every intermediate component must avoid c; otherwise the branch is not monotone.
    """
    lo, hi = target.lo, target.hi
    for k in range(stop - 1, start - 1, -1):
        x = orbit.values[k]
        side = 1 if x > f.c else -1
        a = _inverse_branch(f, lo, side)
        b = _inverse_branch(f, hi, side)
        if a is None or b is None:
            raise CombinatoricsBroken(level, f"pull-back left the range of h at time {k}")
        lo, hi = (a, b) if a < b else (b, a)
        if lo < f.c < hi or not lo < x < hi:
            raise CombinatoricsBroken(level, f"pull-back component at time {k} is not monotone")
    return RealInterval(lo, hi)


def _first_entry(orbit: CriticalOrbit, interval: RealInterval, start: int, level: int) -> int:
    for k in range(start + 1, len(orbit.values)):
        if orbit.values[k] in interval:
            return k - start
    raise InsufficientPrecision("critical orbit too short for the next return", level=level)


def _iterate(f: UnimodalMap, x, times: int):
    for _ in range(times):
        x = f._raw(x)
    return x


def _check_resolved(point, err: float, interval: RealInterval, level: int, what: str):
    d = min(abs(point - interval.lo), abs(point - interval.hi))
    if err > RESOLUTION_MARGIN * float(interval.length) or err >= float(d):
        raise InsufficientPrecision(f"{what} not resolved (error {err:.2e})", level=level)


def first_return_level(f: UnimodalMap, prev: RenormLevel | RealInterval, orbit: CriticalOrbit) -> RenormLevel:
    """Build level n from level n-1 (or from I^0 directly)."""
    if isinstance(prev, RealInterval):
        prev = RenormLevel(0, prev)
    n = prev.n + 1
    P = prev.I_central
    with f.ctx.local():
        r = _first_entry(orbit, P, 0, n)
        s = _first_entry(orbit, P, r, n)
        if len(orbit.values) <= r + s:
            raise InsufficientPrecision("critical orbit too short", level=n)
        J1 = _pull_back(f, orbit, P, r, 1, n)
        w = gmpy2.sqrt(f.h.inverse(J1.hi))
        central = RealInterval(f.c - w, f.c + w)
        side = _pull_back(f, orbit, P, r + s, r, n)

        err = max(orbit.errors[: r + s + 1])
        _check_resolved(orbit.values[r], orbit.errors[r], side, n, "g_n(c) in the side interval")
        _check_resolved(orbit.values[r + s], orbit.errors[r + s], central, n, "g_n^2(c) in the central interval")
        if err > RESOLUTION_MARGIN * float(central.length):
            raise InsufficientPrecision(f"orbit error {err:.2e} vs |I^n| {float(central.length):.2e}", level=n)
        drift = max(orbit.drift[: r + s + 1])
        if drift >= float(central.length):
            raise InsufficientPrecision(
                f"parameter uncertainty moves the orbit by {drift:.2e}, more than |I^n|", level=n)

        level = RenormLevel(n, central, side, r, s, float(central.length / P.length))
        failures = check_level_properties(f, level, P, orbit)
        if failures:
            raise CombinatoricsBroken(n, "; ".join(failures))
    return level


def check_level_properties(f: UnimodalMap, level: RenormLevel, P: RealInterval, orbit: CriticalOrbit) -> list[str]:
    """Nesting plus the three structural properties of a Fibonacci return; returns failure messages."""
    out = []
    C, S = level.I_central, level.I_side
    r, s = level.time_central, level.time_side
    tol = 2 ** (-f.ctx.bits // 2) * float(P.length)
    with f.ctx.local():
        if not P.contains_interval(C, strict=True):
            out.append("central interval not strictly nested")
        if not P.contains_interval(S):
            out.append("side interval not inside the previous level")
        if not C.disjoint(S):
            out.append("side and central intervals overlap")
        if not f.c in C:
            out.append("critical point outside central interval")
        # (i) side branch is onto, boundary to boundary
        ends = sorted([_iterate(f, S.lo, s), _iterate(f, S.hi, s)])
        if abs(ends[0] - P.lo) > tol or abs(ends[1] - P.hi) > tol:
            out.append("side branch not onto the previous level")
        # (ii) high return of the central branch
        edge = _iterate(f, C.hi, r)
        img = (min(edge, orbit.values[r]), max(edge, orbit.values[r]))
        if abs(edge - P.lo) > tol and abs(edge - P.hi) > tol:
            out.append("central branch boundary does not land on the previous boundary")
        if not (img[0] <= C.lo and C.hi <= img[1]):
            out.append("central branch is not a high return")
        # (iii) g_n c in the side interval, g_n^2 c in the central one
        if orbit.values[r] not in S:
            out.append("g_n(c) outside the side interval")
        if orbit.values[r + s] not in C:
            out.append("g_n^2(c) outside the central interval")
    return out


@dataclass
class Hierarchy:
    f: UnimodalMap
    orbit: CriticalOrbit
    levels: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.levels) - 1

    def __getitem__(self, n: int) -> RenormLevel:
        return self.levels[n]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def mus(self) -> list[float]:
        return [lv.mu for lv in self.levels[1:]]


def orbit_length_for(levels: int) -> int:
    return fibonacci_times(levels + 4)[-1] + 2


def build_hierarchy(f: UnimodalMap, levels: int, strict: bool = True) -> Hierarchy:
    """Levels 0..levels; with ``strict=False`` construction stops quietly at the first failure."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    try:
        orbit = critical_orbit(f, orbit_length_for(levels))
    except OrbitEscaped as exc:
        raise NotFibonacciRegime(f"critical orbit escaped at time {exc.time}") from exc
    hier = Hierarchy(f, orbit, [RenormLevel(0, build_I0(f))])
    for _ in range(levels):
        try:
            hier.levels.append(first_return_level(f, hier.levels[-1], orbit))
        except (CombinatoricsBroken, InsufficientPrecision):
            if strict:
                raise
            break
    return hier


@dataclass(frozen=True)
class ScalingRow:
    n: int
    mu: float
    ratio1: float | None
    ratio3: float | None
    time_central: int
    time_side: int
    sigma_side: float | None


@dataclass(frozen=True)
class ScalingTable:
    rows: list
    slope: float
    intercept: float
    fit_range: tuple

    @property
    def constant(self) -> float:
        """The prefactor in mu_n ~ const * 2^(slope n)."""
        return 2.0 ** self.intercept

    def row(self, n: int) -> ScalingRow:
        return next(r for r in self.rows if r.n == n)


def fit_log2_slope(ns, mus) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.asarray(ns, float), np.log2(np.asarray(mus, float)), 1)
    return float(slope), float(intercept)


def scaling_table(hier: Hierarchy, fit_from: int = 8, multipliers: bool = True) -> ScalingTable:
    """Scaling factors, their one- and three-step ratios, and a log2-linear fit."""
    mus = {lv.n: lv.mu for lv in hier.levels[1:]}
    rows = []
    for lv in hier.levels[1:]:
        n = lv.n
        sigma = None
        if multipliers:
            try:
                sigma = branch_multipliers(hier, n)[1]
            except MultiplierNotFound:
                sigma = None
        rows.append(ScalingRow(
            n, lv.mu,
            mus[n] / mus[n - 1] if n - 1 in mus else None,
            mus[n + 3] / mus[n] if n + 3 in mus else None,
            lv.time_central, lv.time_side,
            None if sigma is None else float(sigma),
        ))
    ns = [n for n in mus if n >= fit_from]
    if len(ns) < 2:
        ns = list(mus)
    if len(ns) >= 2:
        slope, intercept = fit_log2_slope(ns, [mus[n] for n in ns])
    else:
        slope = intercept = float("nan")
    return ScalingTable(rows, slope, intercept, (min(ns), max(ns)) if ns else (0, 0))


@dataclass(frozen=True)
class Rescaling:
    """Affine charts A_n: I^n -> T and A_{n-1}: I^{n-1} -> T, with the orientation flag."""

    level: int
    center: object
    half_n: object
    half_prev: object
    orientation: int
    a: object

    def to_T(self, x):
        return self.a * (x - self.center) / self.half_n

    def from_T(self, X):
        return self.center + X * self.half_n / self.a

    def prev_to_T(self, y):
        return self.orientation * self.a * (y - self.center) / self.half_prev


def rescaling(hier: Hierarchy, n: int) -> Rescaling:
    f = hier.f
    lv, prev = hier[n], hier[n - 1]
    with f.ctx.local():
        a = golden(f.ctx)
        probe = _iterate(f, f.c + lv.half_width / 2, lv.time_central)
        orient = 1 if probe > hier.orbit.values[lv.time_central] else -1
        return Rescaling(n, f.c, lv.half_width, prev.half_width, orient, a)


def rescaled_map_values(hier: Hierarchy, n: int, samples) -> np.ndarray:
    """G_n at points of T = [-a, a], oriented so that 0 is a minimum."""
    f = hier.f
    if not 1 <= n <= hier.depth:
        raise ValueError(f"level {n} not constructed")
    R = rescaling(hier, n)
    r = hier[n].time_central
    out = []
    with f.ctx.local():
        for X in samples:
            X = mpfr(X)
            if abs(X) > R.a * (1 + 1e-12):
                raise ValueError(f"sample {float(X)} outside T")
            y = _iterate(f, R.from_T(X), r)
            out.append(float(R.prev_to_T(y)))
    return np.asarray(out)


def rescaled_derivative_values(hier: Hierarchy, n: int, samples) -> np.ndarray:
    """G_n' at points of T by the chain rule."""
    f = hier.f
    R = rescaling(hier, n)
    r = hier[n].time_central
    out = []
    with f.ctx.local():
        for X in samples:
            _, d = _iterate_with_derivative(f, R.from_T(mpfr(X)), r)
            out.append(float(d * R.orientation * R.half_n / R.half_prev))
    return np.asarray(out)


def _iterate_with_derivative(f: UnimodalMap, x, times: int):
    d = mpfr(1)
    for _ in range(times):
        u = x - f.c
        d *= 2 * u * f.h.deriv(u * u)
        x = f.h(u * u)
    return x, d


def _fixed_point(f: UnimodalMap, x0, times: int, domain: RealInterval, max_steps: int = 100):
    """Newton for f^times(x) = x started at x0; returns (x, multiplier) or None if it leaves the domain."""
    x = x0
    tol = abs(domain.length) * 2 ** (-(3 * f.ctx.bits) // 4)
    noise = abs(domain.length) * 2 ** (-f.ctx.bits // 2)
    last = None
    for _ in range(max_steps):
        y, d = _iterate_with_derivative(f, x, times)
        if d == 1:
            return None
        step = (y - x) / (d - 1)
        x = x - step
        if not domain.lo < x < domain.hi:
            return None
        # stop at the tolerance, or once rounding noise keeps the step from shrinking
        if abs(step) <= tol or (last is not None and abs(step) > last / 2 and last <= noise):
            _, d = _iterate_with_derivative(f, x, times)
            return x, d
        last = abs(step)
    raise MultiplierNotFound(f"Newton did not converge in {max_steps} steps")


def _bracketed_fixed_point(f: UnimodalMap, domain: RealInterval, times: int, max_steps: int = 100):
    """Safeguarded Newton on a monotone branch with a sign change across ``domain``."""
    lo, hi = domain.lo, domain.hi
    g_lo = _iterate(f, lo, times) - lo
    g_hi = _iterate(f, hi, times) - hi
    if g_lo * g_hi > 0:
        return None
    x = (lo + hi) / 2
    tol = abs(domain.length) * 2 ** (-(3 * f.ctx.bits) // 4)
    noise = abs(domain.length) * 2 ** (-f.ctx.bits // 2)
    last = None
    for _ in range(max_steps):
        y, d = _iterate_with_derivative(f, x, times)
        g = y - x
        if (g < 0) == (g_lo < 0):
            lo = x
        else:
            hi = x
        nx = x - g / (d - 1) if d != 1 else (lo + hi) / 2
        if not lo < nx < hi:
            nx = (lo + hi) / 2
        step = abs(nx - x)
        x = nx
        if step <= tol or (last is not None and step > last / 2 and last <= noise):
            _, d = _iterate_with_derivative(f, x, times)
            return x, d
        last = step
    raise MultiplierNotFound(f"Newton did not converge in {max_steps} steps")


def branch_multipliers(hier: Hierarchy, n: int):
    """(sigma_central, sigma_side): multipliers of the fixed points of the two branches of g_n.

    The central branch has two fixed points; the orientation-reversing one is
    reported.  None marks a branch whose fixed point could not be isolated.
    """
    f = hier.f
    lv = hier[n]
    with f.ctx.local():
        side = _bracketed_fixed_point(f, lv.I_side, lv.time_side)
        sigma_side = None if side is None else side[1]
        found = []
        w = lv.half_width
        for sgn in (-1, 1):
            res = _fixed_point(f, f.c + sgn * w / golden(f.ctx), lv.time_central, lv.I_central)
            if res is not None and res[1] < 0:
                found.append(res)
        distinct = {format(x, ".12e") for x, _ in found}
        sigma_central = found[0][1] if len(distinct) == 1 else None
    return sigma_central, sigma_side


def side_fixed_point(hier: Hierarchy, n: int):
    f = hier.f
    lv = hier[n]
    with f.ctx.local():
        res = _bracketed_fixed_point(f, lv.I_side, lv.time_side)
    if res is None:
        raise MultiplierNotFound(f"no fixed point on the side branch at level {n}")
    return res


def alpha_multiplier(f: UnimodalMap):
    with f.ctx.local():
        return f.derivative(f.alpha)


def expected_mu_ratio3() -> float:
    return 0.5


def expected_slope() -> float:
    return -1.0 / 3.0


def default_samples(count: int = 101) -> np.ndarray:
    return np.linspace(-GOLDEN, GOLDEN, count)


def sup_deviation_from_quadratic(hier: Hierarchy, n: int, count: int = 101) -> float:
    x = default_samples(count)
    return float(np.max(np.abs(rescaled_map_values(hier, n, x) - (x * x - 1))))


def finite_difference_check(hier: Hierarchy, n: int, x, h: float = 1e-20):
    """Relative mismatch between the chain-rule derivative of g_n and a central difference."""
    f = hier.f
    lv = hier[n]
    with f.ctx.local():
        x = mpfr(x)
        _, d = _iterate_with_derivative(f, x, lv.time_central)
        hh = mpfr(h) * lv.half_width
        fd = (_iterate(f, x + hh, lv.time_central) - _iterate(f, x - hh, lv.time_central)) / (2 * hh)
        return float(abs(fd - d) / abs(d))


__all__ = [
    "RenormLevel", "Hierarchy", "ScalingRow", "ScalingTable", "Rescaling",
    "build_I0", "first_return_level", "build_hierarchy", "scaling_table",
    "rescaled_map_values", "rescaled_derivative_values", "branch_multipliers",
    "check_level_properties", "sup_deviation_from_quadratic", "fit_log2_slope",
    "side_fixed_point", "alpha_multiplier", "finite_difference_check", "rescaling",
]
