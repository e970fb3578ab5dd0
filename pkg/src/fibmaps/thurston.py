"""Pull-back iteration on real-symmetric marked triples {gamma, 0, a}."""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .errors import DegenerateTriple, Divergence
from .numerics import PrecisionContext, golden

MAX_STEPS = 10_000


@dataclass(frozen=True)
class MarkedTriple:
    gamma: object
    ctx: PrecisionContext = PrecisionContext()

    def __post_init__(self):
        g = self.ctx.real(self.gamma)
        if not g < 0:
            raise DegenerateTriple(self.gamma)
        object.__setattr__(self, "gamma", g)

    @property
    def a(self):
        return golden(self.ctx)


@dataclass(frozen=True)
class PullbackPolynomial:
    """p(z) = alpha*z^2 + gamma, the quadratic fixing a and sending 0 to gamma."""

    gamma: object
    ctx: PrecisionContext = PrecisionContext()

    @property
    def alpha(self):
        with self.ctx.local():
            a = golden(self.ctx)
            return (a - self.gamma) / (a * a)

    def __call__(self, z):
        with self.ctx.local():
            return self.alpha * z * z + self.gamma

    def negative_root(self, tol_bits: int | None = None):
        """The negative zero of p by Newton iteration (independent of the closed form)."""
        with self.ctx.local():
            al = self.alpha
            z = -golden(self.ctx)
            eps = mpfr(2) ** (-(tol_bits or self.ctx.bits - 4))
            for _ in range(500):
                step = (al * z * z + self.gamma) / (2 * al * z)
                z -= step
                if abs(step) <= eps * abs(z):
                    break
            return z


def thurston_step(t: MarkedTriple) -> MarkedTriple:
    """gamma -> -a*sqrt(-gamma/(a - gamma))."""
    g = t.gamma
    if not g < 0:
        raise DegenerateTriple(g)
    with t.ctx.local():
        a = golden(t.ctx)
        return MarkedTriple(-a * gmpy2.sqrt(-g / (a - g)), t.ctx)


@dataclass(frozen=True)
class ThurstonRun:
    limit: MarkedTriple
    steps: int
    gammas: list
    rates: list

    @property
    def asymptotic_rate(self) -> float | None:
        """Last contraction ratio whose distance to the fixed point is still well above rounding."""
        good = [r for r, g in zip(self.rates, self.gammas[:-1]) if r is not None]
        return good[-1] if good else None

    def table(self) -> list[tuple[int, object, float | None]]:
        """Rows (k, gamma_k, |gamma_k + 1| / |gamma_{k-1} + 1|)."""
        return [(k, g, None if k == 0 else self.rates[k - 1]) for k, g in enumerate(self.gammas)]


def iterate_to_fixed_point(t0: MarkedTriple, tol: float = 1e-30, max_steps: int = MAX_STEPS) -> ThurstonRun:
    """Iterate until successive gammas differ by less than ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    ctx = t0.ctx
    floor = 2.0 ** (-ctx.bits + 8)
    t = t0
    gammas, rates = [t.gamma], []
    with ctx.local():
        for k in range(1, max_steps + 1):
            nxt = thurston_step(t)
            d0, d1 = abs(t.gamma + 1), abs(nxt.gamma + 1)
            # ratios are meaningless once both distances sit at the rounding floor
            rates.append(float(d1 / d0) if d0 > floor and d1 > floor else None)
            gammas.append(nxt.gamma)
            done = abs(nxt.gamma - t.gamma) < tol
            t = nxt
            if done:
                return ThurstonRun(t, k, gammas, rates)
    raise Divergence(max_steps)


def contraction_constant() -> float:
    """|d gamma'/d gamma| at the fixed point, 1/(2a)."""
    return 1.0 / (2.0 * golden())
