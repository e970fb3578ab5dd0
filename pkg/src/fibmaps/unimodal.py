"""Quasi-quadratic maps f = h((x - c)^2) and the Fibonacci parameter search.

Maps are normalized to have a minimum at the critical point (h increasing).
A family's parameter ``t`` enters h additively, so the pure quadratic family
is exactly x -> x^2 + t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import CombinatoricsUnreachable, InsufficientPrecision, OrbitEscaped
from .numerics import PrecisionContext, RealInterval


class PolynomialDiffeo:
    """h(y) = sum_k coeffs[k] * y**k, evaluated on any numeric type.

    Besides plain evaluation it provides cancellation-free increments
    ``delta(y0, dy) = h(y0 + dy) - h(y0)`` on float/complex arrays, which is
    what the complex pull-back machinery runs on.
    """

    def __init__(self, coeffs):
        coeffs = tuple(coeffs)
        while len(coeffs) > 2 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2:
            raise ValueError("h must have degree >= 1")
        self.coeffs = coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, y):
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * y + c
        return acc

    def deriv(self, y):
        n = self.degree
        acc = n * self.coeffs[n]
        for k in range(n - 1, 0, -1):
            acc = acc * y + k * self.coeffs[k]
        return acc

    def as_float_function(self):
        cf = [float(c) for c in self.coeffs]
        return lambda y: np.polynomial.polynomial.polyval(y, cf)

    def taylor(self, y0: float) -> np.ndarray:
        """Coefficients d_1..d_n of h(y0 + dy) - h(y0) in powers of dy (float64)."""
        cf = [float(c) for c in self.coeffs]
        n = len(cf) - 1
        out = np.zeros(n)
        for j in range(1, n + 1):
            out[j - 1] = sum(math.comb(k, j) * cf[k] * y0 ** (k - j) for k in range(j, n + 1))
        return out

    def delta(self, y0: float, dy, taylor=None):
        d = self.taylor(y0) if taylor is None else taylor
        acc = d[-1]
        for c in reversed(d[:-1]):
            acc = acc * dy + c
        return acc * dy

    def delta_inverse(self, y0: float, dw, taylor=None, iters: int = 50):
        """Solve delta(y0, dy) = dw for dy near 0 (Newton, vectorized)."""
        d = self.taylor(y0) if taylor is None else taylor
        dw = np.asarray(dw, dtype=complex)
        dy = dw / d[0]
        if len(d) == 1:
            return dy
        dd = d * np.arange(1, len(d) + 1)
        for _ in range(iters):
            val = np.polynomial.polynomial.polyval(dy, np.concatenate([[0.0], d])) - dw
            der = np.polynomial.polynomial.polyval(dy, dd)
            step = val / der
            dy = dy - step
            if np.all(np.abs(step) <= 1e-15 * (np.abs(dy) + 1e-300)):
                break
        return dy

    def inverse(self, w, lo=None, hi=None):
        """Real preimage of w (multi-precision Newton, bracketed when bounds given)."""
        if self.degree == 1:
            return (w - self.coeffs[0]) / self.coeffs[1]
        y = (w - self.coeffs[0]) / self.coeffs[1]
        for _ in range(200):
            step = (self(y) - w) / self.deriv(y)
            y = y - step
            if step == 0 or abs(step) <= abs(y) * 2 ** (-gmpy2.get_context().precision + 4):
                break
        return y

    def affine(self, scale, shift) -> "PolynomialDiffeo":
        """(h(scale^2 y) - shift) / scale."""
        s2 = scale * scale
        cf = [(self.coeffs[0] - shift) / scale]
        cf += [c * s2 ** k / scale for k, c in enumerate(self.coeffs) if k > 0]
        return PolynomialDiffeo(cf)


@dataclass(frozen=True, eq=False)
class UnimodalMap:
    """f(x) = h((x - c)^2) with h increasing on the image of the square map.

    ``param_error`` bounds the uncertainty of the family parameter that produced
    this map; ``param_sensitivity`` bounds |df/dt|.  Both feed the forward error
    estimates carried by critical orbits.
    """

    h: PolynomialDiffeo
    ctx: PrecisionContext
    c: object = 0
    t: object = None
    param_error: float = 0.0
    param_sensitivity: float = 1.0
    name: str = "map"

    def __post_init__(self):
        object.__setattr__(self, "c", self.ctx.real(self.c))

    def __call__(self, x):
        return evaluate(self, x)

    def derivative(self, x):
        with self.ctx.local():
            if isinstance(x, (complex, mpc)):
                u = mpc(x) - self.c
            else:
                u = mpfr(x) - self.c
            return 2 * u * self.h.deriv(u * u)

    @cached_property
    def critical_value(self):
        with self.ctx.local():
            return self.h(mpfr(0))

    def _raw(self, x):
        u = x - self.c
        return self.h(u * u)

    def fixed_points(self) -> list:
        """Real fixed points, sorted, polished at working precision."""
        hc = [float(v) for v in self.h.coeffs]
        c = float(self.c)
        # h((x - c)^2) - x as a polynomial in x
        sq = np.polynomial.Polynomial([c * c, -2 * c, 1.0])
        poly = np.polynomial.Polynomial([0.0])
        for k, a in enumerate(hc):
            poly = poly + a * sq ** k
        poly = poly - np.polynomial.Polynomial([0.0, 1.0])
        roots = [r.real for r in poly.roots() if abs(r.imag) < 1e-9 * max(1.0, abs(r))]
        out = []
        with self.ctx.local():
            for r in roots:
                x = mpfr(r)
                for _ in range(100):
                    g = self._raw(x) - x
                    dg = self.derivative(x) - 1
                    if dg == 0:
                        break
                    step = g / dg
                    x -= step
                    if abs(step) <= abs(x) * 2 ** (-self.ctx.bits + 4) or step == 0:
                        break
                out.append(x)
        return sorted(out)

    @cached_property
    def alpha(self):
        """Orientation-reversing fixed point left of c with f' < -1, or None."""
        cands = [x for x in self.fixed_points() if x < self.c and self.derivative(x) < -1]
        return max(cands) if cands else None

    @cached_property
    def beta(self):
        """Orientation-preserving repelling fixed point right of c, or None."""
        cands = [x for x in self.fixed_points() if x > self.c and self.derivative(x) > 1]
        return max(cands) if cands else None

    @cached_property
    def dynamical_interval(self) -> RealInterval:
        """[c - rho, c + rho]; rho = beta - c when beta exists, else the radius where h' stays positive."""
        with self.ctx.local():
            if self.beta is not None:
                rho = self.beta - self.c
            else:
                dh = np.polynomial.Polynomial([float(v) for v in self.h.coeffs]).deriv()
                pos = [r.real for r in dh.roots() if abs(r.imag) < 1e-12 and r.real > 0]
                ymax = min(pos) if pos else 4.0 * max(1.0, abs(float(self.critical_value - self.c))) ** 2
                rho = gmpy2.sqrt(mpfr(ymax))
            return RealInterval(self.c - rho, self.c + rho)

    def conjugate(self, scale, shift=0, name: str | None = None) -> "UnimodalMap":
        """A^{-1} o f o A for A(x) = scale*x + shift (scale > 0)."""
        with self.ctx.local():
            scale, shift = mpfr(scale), mpfr(shift)
            if not scale > 0:
                raise ValueError("conjugating scale must be positive")
            return UnimodalMap(
                h=self.h.affine(scale, shift),
                ctx=self.ctx,
                c=(self.c - shift) / scale,
                t=self.t,
                param_error=self.param_error,
                param_sensitivity=self.param_sensitivity / float(scale),
                name=name or f"{self.name}-conj",
            )


def evaluate(f: UnimodalMap, x):
    """f(x) at working precision; real inputs must stay in the dynamical interval."""
    with f.ctx.local():
        if isinstance(x, (complex, mpc)):
            z = mpc(x)
            bound = max(f.ctx.escape_radius, 2 * float(f.dynamical_interval.length / 2))
            if abs(z - f.c) > bound:
                raise OrbitEscaped(0, z)
            return f._raw(z)
        x = mpfr(x)
        dyn = f.dynamical_interval
        if not dyn.lo <= x <= dyn.hi:
            raise OrbitEscaped(0, x)
        return f._raw(x)


def evaluate_derivative(f: UnimodalMap, x):
    return f.derivative(x)


@dataclass(frozen=True)
class CriticalOrbit:
    """values[k] = f^k(c) for k = 0..N.

    ``errors`` bounds the accumulated rounding error (first order) for the map
    as given; ``drift`` bounds how far the orbit can move when the family
    parameter ranges over its uncertainty ``param_error``.
    """

    values: tuple
    errors: tuple
    drift: tuple

    @property
    def points(self) -> tuple:
        return self.values[1:]

    def __len__(self) -> int:
        return len(self.values) - 1


def critical_orbit(f: UnimodalMap, n: int) -> CriticalOrbit:
    """Forward orbit of c of length n at the map's precision."""
    ctx = f.ctx
    dhc = [float(v) for v in np.polynomial.Polynomial([float(v) for v in f.h.coeffs]).deriv().coef]
    u_round = ctx.unit_roundoff
    perr = f.param_error * f.param_sensitivity
    dyn = f.dynamical_interval
    with ctx.local():
        x = f.c
        values, errors, drift = [x], [0.0], [0.0]
        err = dr = 0.0
        for k in range(1, n + 1):
            u = x - f.c
            uf = float(u)
            slope = abs(2 * uf * float(np.polynomial.polynomial.polyval(uf * uf, dhc)))
            x = f.h(u * u)
            err = slope * err + u_round * (abs(float(x)) + 1.0)
            dr = slope * dr + perr
            if not dyn.lo <= x <= dyn.hi:
                raise OrbitEscaped(k, x)
            values.append(x)
            errors.append(err)
            drift.append(dr)
    return CriticalOrbit(tuple(values), tuple(errors), tuple(drift))


@dataclass(frozen=True)
class ClosestReturnRecord:
    times: tuple
    distances: tuple


def closest_returns(f: UnimodalMap, n: int, orbit: CriticalOrbit | None = None) -> ClosestReturnRecord:
    """Times t <= n at which |f^t(c) - c| beats every earlier distance."""
    if n < 2:
        raise ValueError("N must be >= 2")
    if orbit is None or len(orbit) < n:
        orbit = critical_orbit(f, n)
    times, dists = [], []
    best = None
    with f.ctx.local():
        for k in range(1, n + 1):
            d = abs(orbit.values[k] - f.c)
            if best is None or d < best:
                best = d
                times.append(k)
                dists.append(d)
    return ClosestReturnRecord(tuple(times), tuple(dists))


def fibonacci_times(count: int) -> list[int]:
    """S_0 = 1, S_1 = 2, S_{k+1} = S_k + S_{k-1}; the first ``count`` terms."""
    s = [1, 2]
    while len(s) < count:
        s.append(s[-1] + s[-2])
    return s[:count]


@lru_cache(maxsize=None)
def fibonacci_kneading(length: int) -> tuple:
    """Sides (-1 left of c, +1 right) of f^k(c), k = 1..length, for Fibonacci combinatorics.

    Built from the cutting-time recursion with kneading map Q(k) = max(k - 2, 0):
    the block between consecutive cutting times repeats the first S_{Q(k)}
    symbols with the last one flipped.  The recursion is stated for maps with a
    maximum at c; minimum-type maps see the mirrored sequence.
    """
    s = fibonacci_times(64)
    e = [1]
    k = 1
    while len(e) < length:
        block = e[: s[max(k - 2, 0)]]
        block = block[:-1] + [1 - block[-1]]
        e.extend(block)
        k += 1
    return tuple(-1 if v == 1 else 1 for v in e[:length])


def _symbol_rank(s: int) -> int:
    return s  # -1 < 0 < +1


def _compare_symbols(seq, target) -> tuple[int, int]:
    parity = 0
    for k, (sym, want) in enumerate(zip(seq, target), start=1):
        if sym != want:
            sign = 1 if sym > want else -1
            return (sign if parity % 2 == 0 else -sign), k
        if sym == -1:
            parity += 1
    return 0, len(target)


def kneading_compare(f: UnimodalMap, target) -> tuple[int, int]:
    """Compare the kneading sequence of f with ``target`` in the itinerary order.

    Returns (sign, index): sign is -1/0/+1 and index is the 1-based time of the
    first disagreement (or the matched length).  A critical orbit leaving the
    dynamical interval places f beyond the full map, whose kneading is
    (-1, +1, +1, ...).  Raises InsufficientPrecision when the orbit error
    reaches the critical point before a decision.
    """
    ctx = f.ctx
    dhc = [float(v) for v in np.polynomial.Polynomial([float(v) for v in f.h.coeffs]).deriv().coef]
    u_round = ctx.unit_roundoff
    perr = f.param_error * f.param_sensitivity
    dyn = f.dynamical_interval
    parity = 0
    with ctx.local():
        x = f.c
        err = 0.0
        for k, want in enumerate(target, start=1):
            u = x - f.c
            uf = float(u)
            slope = abs(2 * uf * float(np.polynomial.polynomial.polyval(uf * uf, dhc)))
            x = f.h(u * u)
            err = slope * err + u_round * (abs(float(x)) + 1.0) + perr
            if not dyn.lo <= x <= dyn.hi:
                full = [-1] + [1] * (len(target) - 1)
                return _compare_symbols(full, target)
            d = x - f.c
            if d == 0:
                sym = 0
            else:
                if abs(float(d)) <= err:
                    raise InsufficientPrecision(f"kneading symbol {k} unresolved")
                sym = 1 if d > 0 else -1
            if sym != want:
                sign = 1 if sym > want else -1
                return (sign if parity % 2 == 0 else -sign), k
            if sym == -1:
                parity += 1
    return 0, len(target)


@dataclass(frozen=True)
class Family:
    """One-parameter family t -> f_t with h_t(y) = t + y + epsilon*y^3."""

    name: str
    epsilon: float = 0.0
    param_range: tuple = (-2.0, 0.0)

    def make(self, t, ctx: PrecisionContext, param_error: float = 0.0) -> UnimodalMap:
        with ctx.local():
            t = mpfr(t)
            coeffs = [t, mpfr(1)]
            if self.epsilon:
                coeffs += [mpfr(0), mpfr(repr(float(self.epsilon)))]
            return UnimodalMap(
                h=PolynomialDiffeo(coeffs), ctx=ctx, c=0, t=t,
                param_error=param_error, param_sensitivity=1.0, name=self.name,
            )


def quadratic_family() -> Family:
    return Family("quadratic", 0.0, (-2.0, 0.0))


def cubic_family(epsilon: float = 0.01) -> Family:
    """x^2 + t + epsilon*x^6.

    Negative epsilon flattens the map near the ends of the interval; for
    epsilon = -0.01 the family is no longer full and Fibonacci combinatorics
    are out of reach.
    """
    return Family("cubic", float(epsilon), (-2.0, 0.0))


FAMILIES = {"quadratic": quadratic_family, "cubic": cubic_family}


def family_by_name(name: str, epsilon: float = 0.01) -> Family:
    if name == "quadratic":
        return quadratic_family()
    if name == "cubic":
        return cubic_family(epsilon)
    raise ValueError(f"unknown family {name!r}")


@dataclass(frozen=True)
class FibonacciParameter:
    """Result of the parameter search.

    ``value`` is the midpoint of the parameter interval realizing the first
    ``depth`` Fibonacci closest returns; ``bracket`` encloses that interval.
    """

    value: object
    bracket: tuple
    inner: tuple
    depth: int
    bits: int
    family: str
    certificate: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return float(self.bracket[1] - self.bracket[0])

    @property
    def error(self) -> float:
        return max(float(self.value - self.bracket[0]), float(self.bracket[1] - self.value))

    def make_map(self, family: Family, ctx: PrecisionContext) -> UnimodalMap:
        return family.make(self.value, ctx, param_error=self.error)


def locate_fibonacci_parameter(family: Family, depth: int, ctx: PrecisionContext,
                               refine: bool = True) -> FibonacciParameter:
    """Bisect the family for the parameter with Fibonacci closest returns.

    The kneading sequence of a full family is monotone in t, so the parameters
    whose first S_depth kneading symbols agree with the Fibonacci ones form an
    interval.  Its ends are resolved at least to 2^-(bits/2); with ``refine``
    the halving continues towards 2^-(bits-32) for as long as every kneading
    symbol stays resolved.  The midpoint is returned and every halving is
    logged in ``certificate``.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2")
    length = fibonacci_times(depth + 1)[-1]
    target = fibonacci_kneading(length)
    required = ctx.parameter_tolerance
    tol = 2.0 ** (-(ctx.bits - 32)) if refine else required

    certificate = []

    def log(phase, lo, hi, mid, verdict, index):
        certificate.append({
            "step": len(certificate), "phase": phase,
            "lo": _fmt(lo, ctx), "hi": _fmt(hi, ctx), "mid": _fmt(mid, ctx),
            "verdict": verdict, "first_difference": index,
        })

    def bisect(phase, lo, hi, keep_lo):
        """Halve [lo, hi] keeping the end for which keep_lo(sign) says so; stop at tol."""
        while hi - lo > tol:
            mid = (lo + hi) / 2
            try:
                s, idx = kneading_compare(family.make(mid, ctx), target)
            except InsufficientPrecision:
                if hi - lo <= required:
                    break
                raise
            log(phase, lo, hi, mid, verdicts[s], idx)
            if phase == "locate" and s == 0:
                return lo, hi, mid
            if keep_lo(s):
                hi = mid
            else:
                lo = mid
        return lo, hi, None

    with ctx.local():
        lo, hi = (mpfr(v) for v in family.param_range)
        s_lo, _ = kneading_compare(family.make(lo, ctx), target)
        s_hi, _ = kneading_compare(family.make(hi, ctx), target)
        if s_lo == 0 or s_hi == 0 or s_lo == s_hi:
            raise CombinatoricsUnreachable(
                f"kneading at the ends of {family.param_range} does not bracket the Fibonacci type")
        verdicts = {s_lo: "toward-lo", s_hi: "toward-hi", 0: "inside"}
        lo, hi, inside = bisect("locate", lo, hi, lambda s: s == s_hi)
        if inside is None:
            mid = (lo + hi) / 2
            return FibonacciParameter(mid, (lo, hi), (mid, mid), depth, ctx.bits, family.name, certificate)
        left_out, left_in, _ = bisect("lower-end", lo, inside, lambda s: s == 0)
        right_in, right_out, _ = bisect("upper-end", inside, hi, lambda s: s != 0)
        value = (left_in + right_in) / 2
    return FibonacciParameter(value, (left_out, right_out), (left_in, right_in),
                              depth, ctx.bits, family.name, certificate)


def _fmt(x, ctx: PrecisionContext) -> str:
    digits = max(17, int(ctx.bits * 0.30103) + 2)
    with ctx.local():
        return format(mpfr(x), f".{digits}g")


def format_real(x, ctx: PrecisionContext | None = None, digits: int | None = None) -> str:
    if ctx is None:
        return repr(float(x))
    if digits is None:
        return _fmt(x, ctx)
    with ctx.local():
        return format(mpfr(x), f".{digits}g")


@lru_cache(maxsize=32)
def fibonacci_map(family_name: str = "quadratic", epsilon: float = 0.01, depth: int = 20,
                  bits: int = 256) -> tuple[UnimodalMap, FibonacciParameter]:
    """Cached convenience: locate the parameter and build the map."""
    ctx = PrecisionContext(bits=bits)
    fam = family_by_name(family_name, epsilon)
    par = locate_fibonacci_parameter(fam, depth, ctx)
    return par.make_map(fam, ctx), par
