"""Conjugacy of two Fibonacci maps on their critical sets and its regularity diagnostics.

Points of the critical orbit are addressed by their descent through the two
branches of the return maps: ``0`` enters the central interval of the next
level, ``1`` enters the side interval and continues with its image under the
side branch one level up.  Equal addresses define the pairing.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .complexext import return_domains
from .errors import CodeMismatch, MultiplierNotFound
from .numerics import RealInterval
from .renorm import Hierarchy, _bracketed_fixed_point, alpha_multiplier, branch_multipliers
from .unimodal import UnimodalMap, fibonacci_times


@dataclass(frozen=True)
class CodedPoint:
    point: object
    code: str
    index: int


def _address(hier: Hierarchy, k: int, depth: int, limit: int) -> str:
    """Descent address of orbit point c_k through levels 1..depth."""
    vals = hier.orbit.values
    symbols = []
    level = 0
    # every "1" moves forward in time, so the walk terminates
    while level < depth:
        nxt = hier[level + 1]
        x = vals[k]
        if x in nxt.I_central:
            symbols.append("0")
            level += 1
        elif x in nxt.I_side:
            if k + nxt.time_side >= limit:
                break
            symbols.append("1")
            k += nxt.time_side
        else:
            break
    return "".join(symbols)


def coded_critical_set(hier: Hierarchy, depth: int | None = None) -> list[CodedPoint]:
    """Orbit points c_k in I^0 with k < S_{depth+2}, each with its address."""
    depth = hier.depth if depth is None else depth
    if depth > hier.depth:
        raise ValueError(f"hierarchy only has {hier.depth} levels")
    limit = min(fibonacci_times(depth + 3)[-1], len(hier.orbit.values))
    f = hier.f
    out = []
    with f.ctx.local():
        I0 = hier[0].I_central
        for k in range(limit):
            x = hier.orbit.values[k]
            if k == 0 or x in I0:
                out.append(CodedPoint(x, _address(hier, k, depth, len(hier.orbit.values)), k))
    return out


@dataclass
class ConjugacyReport:
    pairs: list                      # (code, x, xt, index)
    depth: int
    qs: list = field(default_factory=list)
    multipliers: list = field(default_factory=list)
    tau: float | None = None
    equivariance_failures: int = 0
    monotone: bool = True

    def xs(self) -> np.ndarray:
        return np.array([float(p[1]) for p in self.pairs])

    def to_json_dict(self) -> dict:
        return {
            "pairs": [{"code": c, "x": float(x), "xt": float(xt)} for c, x, xt, _ in self.pairs],
            "qs": [{"scale": s, "max_ratio": m} for s, m in self.qs],
            "multipliers": [{"code": c, "sigma": s, "sigma_t": st} for c, s, st, _ in self.multipliers],
            "tau": self.tau,
        }


def match_critical_sets(hier: Hierarchy, hier_t: Hierarchy, depth: int | None = None) -> ConjugacyReport:
    """Pair orbit points of two Fibonacci maps by address."""
    depth = min(hier.depth, hier_t.depth) if depth is None else depth
    for n in range(1, depth + 1):
        a, b = hier[n], hier_t[n]
        if (a.time_central, a.time_side) != (b.time_central, b.time_side):
            raise CodeMismatch(n, f"return times {a.time_central, a.time_side} vs {b.time_central, b.time_side}")
    A = coded_critical_set(hier, depth)
    B = coded_critical_set(hier_t, depth)
    by_index = {p.index: p for p in B}
    pairs = []
    for p in A:
        q = by_index.get(p.index)
        if q is None or q.code != p.code:
            other = "" if q is None else q.code
            raise CodeMismatch(_first_difference(p.code, other) + 1, f"orbit point {p.index}")
    if len(A) != len(B):
        raise CodeMismatch(depth, "critical sets differ in size")
    for p in A:
        pairs.append((p.code, p.point, by_index[p.index].point, p.index))
    report = ConjugacyReport(pairs, depth)
    report.equivariance_failures = _equivariance_failures(hier, hier_t, pairs, depth)
    order = sorted(pairs, key=lambda t: t[1])
    xt = [t[2] for t in order]
    report.monotone = all(a < b for a, b in zip(xt, xt[1:]))
    return report


def _first_difference(a: str, b: str) -> int:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return min(len(a), len(b))


def _equivariance_failures(hier: Hierarchy, hier_t: Hierarchy, pairs, depth: int) -> int:
    """Apply each applicable return branch to both members of every pair and compare sides."""
    f, ft = hier.f, hier_t.f
    vals, vals_t = hier.orbit.values, hier_t.orbit.values
    bad = 0
    with f.ctx.local():
        for _, x, xt, k in pairs:
            for n in range(1, depth + 1):
                lv, lvt = hier[n], hier_t[n]
                for attr, time in (("I_central", lv.time_central), ("I_side", lv.time_side)):
                    inside = x in getattr(lv, attr)
                    inside_t = xt in getattr(lvt, attr)
                    if inside != inside_t:
                        bad += 1
                    elif inside and k + time < min(len(vals), len(vals_t)):
                        # images land on the same side of the critical point
                        if (vals[k + time] > f.c) != (vals_t[k + time] > ft.c):
                            bad += 1
    return bad


def _nearest(sorted_x: list, value: float) -> int:
    i = bisect.bisect_left(sorted_x, value)
    if i == 0:
        return 0
    if i == len(sorted_x):
        return len(sorted_x) - 1
    return i if abs(sorted_x[i] - value) < abs(sorted_x[i - 1] - value) else i - 1


# the matched set is a Cantor set with gap ratios near 8, so windows must be wide
QS_WINDOW = 4.0
RHO_WINDOW = 8.0


def _within(d: float, s: float, k: float) -> bool:
    return s / k <= d <= k * s


def _pairs_arrays(report: ConjugacyReport):
    """Sorted (x, H(x)) as float offsets from the first pair, keeping relative accuracy."""
    order = sorted(report.pairs, key=lambda t: t[1])
    x0, y0 = order[0][1], order[0][2]
    return [float(t[1] - x0) for t in order], [float(t[2] - y0) for t in order]


def qs_ratio_scan(report: ConjugacyReport, scales, window: float = QS_WINDOW) -> list[tuple[float, float]]:
    """Quasi-symmetry ratios of the matched pairing at each scale.

    For each matched x the matched points nearest to x - s and x + s form a
    triple when both lie at distance between s/window and window*s from x; the ratio |H(x+) - H(x)| / |H(x) - H(x-)| is
    divided by the same ratio for the identity, so affine pairings give 1.
    Reported per scale: the largest value of max(M, 1/M).  Scales without a
    triple are omitted.
    """
    if len(report.pairs) < 3:
        raise ValueError("need at least 3 matched pairs")
    xs, ys = _pairs_arrays(report)
    out = []
    for s in scales:
        s = float(s)
        best = None
        for i, x in enumerate(xs):
            lo = _nearest(xs, x - s)
            hi = _nearest(xs, x + s)
            if lo == i or hi == i:
                continue
            if not (_within(x - xs[lo], s, window) and _within(xs[hi] - x, s, window)):
                continue
            num, den = ys[hi] - ys[i], ys[i] - ys[lo]
            if num == 0 or den == 0:
                continue
            m = abs(num / den) / ((xs[hi] - x) / (x - xs[lo]))
            m = max(m, 1 / m)
            best = m if best is None else max(best, m)
        if best is not None:
            out.append((s, best))
    report.qs = out
    return out


def multiplier_comparison(hier: Hierarchy, hier_t: Hierarchy, depth: int | None = None):
    """Side-branch multipliers per level and the alpha multipliers, with log-ratios.

    Rows are (code, sigma, sigma_t, log|sigma_t| / log|sigma|); returns (rows, tau).
    """
    depth = min(hier.depth, hier_t.depth) if depth is None else depth
    rows = []
    sa, sat = float(alpha_multiplier(hier.f)), float(alpha_multiplier(hier_t.f))
    tau = math.log(abs(sat)) / math.log(abs(sa))
    rows.append(("alpha", sa, sat, tau))
    for n in range(1, depth + 1):
        s = branch_multipliers(hier, n)[1]
        st = branch_multipliers(hier_t, n)[1]
        if s is None or st is None:
            continue
        s, st = float(s), float(st)
        rows.append((f"side{n}", s, st, math.log(abs(st)) / math.log(abs(s))))
    return rows, tau


@dataclass
class SmoothnessDiagnostic:
    ratio_distortion: list      # (n, |I^n|, quantity) with J the level n+1 intervals
    multiplier_shadowing: list  # (|I|, quantity for f, quantity for f~) around alpha
    rho: list                   # (n, eps, rho_n(c), |rho_n - rho_{n-1}|)
    slopes: dict


def _ratio_distortion(I, J, It, Jt) -> float:
    return abs(float((Jt.length / J.length) / (It.length / I.length)) - 1.0)


def _loglog_slope(x, y) -> float | None:
    pts = [(a, b) for a, b in zip(x, y) if a > 0 and b > 0]
    if len(pts) < 2:
        return None
    xs, ys = zip(*pts)
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def default_shadowing_scales(count: int = 8) -> list[float]:
    return [0.2 * 2.0 ** -j for j in range(count)]


def multiplier_shadowing(f: UnimodalMap, width: float, truncation: int = 4,
                         grid: int = 20000, max_time: int = 3000) -> float | None:
    """max over the largest first-return domains L of ||I|/|L| : |sigma_L| - 1| for I of the given width around alpha.

    alpha is outside the critical set, so every return branch is a diffeomorphism
    with a single fixed point.  None when no domain yields a multiplier.
    """
    with f.ctx.local():
        a = f.alpha
        I = RealInterval(a - width / 2, a + width / 2)
    best = None
    for dom in return_domains(f, I, truncation=truncation, grid=grid, max_time=max_time):
        with f.ctx.local():
            try:
                res = _bracketed_fixed_point(f, dom.interval, dom.time)
            except MultiplierNotFound:
                continue
            if res is None:
                continue
            q = abs(float(I.length / dom.interval.length / abs(res[1])) - 1.0)
        best = q if best is None else max(best, q)
    return best


def rho_table(report: ConjugacyReport, max_n: int = 200, window: float = RHO_WINDOW) -> list:
    """Difference quotients of the pairing at the critical point for eps_n = 2^-n.

    The matched points nearest to c - eps and c + eps stand in for those
    arguments; scales where either lies outside [eps/window, window*eps] are omitted.
    """
    xs, ys = _pairs_arrays(report)
    order = sorted(report.pairs, key=lambda t: t[1])
    ci = next(i for i, t in enumerate(order) if t[3] == 0)
    xc = xs[ci]
    rows = []
    prev = None
    for n in range(1, max_n + 1):
        eps = 2.0 ** -n
        lo, hi = _nearest(xs, xc - eps), _nearest(xs, xc + eps)
        if lo == ci or hi == ci or not (_within(xc - xs[lo], eps, window) and _within(xs[hi] - xc, eps, window)):
            continue
        val = (ys[hi] - ys[lo]) / (xs[hi] - xs[lo])
        rows.append((n, eps, val, None if prev is None else abs(val - prev)))
        prev = val
    return rows


def smoothness_diagnostic(report: ConjugacyReport, hier: Hierarchy, hier_t: Hierarchy,
                          shadowing_scales=None) -> SmoothnessDiagnostic:
    dist = []
    with hier.f.ctx.local():
        for n in range(0, report.depth):
            I, It = hier[n].I_central, hier_t[n].I_central
            nxt, nxt_t = hier[n + 1], hier_t[n + 1]
            q = max(_ratio_distortion(I, nxt.I_central, It, nxt_t.I_central),
                    _ratio_distortion(I, nxt.I_side, It, nxt_t.I_side))
            dist.append((n, float(I.length), q))
    shadow = []
    for w in default_shadowing_scales() if shadowing_scales is None else shadowing_scales:
        a, b = multiplier_shadowing(hier.f, w), multiplier_shadowing(hier_t.f, w)
        if a is not None and b is not None:
            shadow.append((w, a, b))
    rho = rho_table(report)
    diffs = [r for r in rho if r[3] is not None]
    slopes = {
        "ratio_distortion": _loglog_slope([r[1] for r in dist], [r[2] for r in dist]),
        "multiplier_shadowing": _loglog_slope([r[0] for r in shadow], [max(r[1], r[2]) for r in shadow]),
        "rho_differences": _loglog_slope([r[1] for r in diffs], [r[3] for r in diffs]),
    }
    return SmoothnessDiagnostic(dist, shadow, rho, slopes)


def hierarchy_scales(hier: Hierarchy, depth: int | None = None) -> list[float]:
    depth = hier.depth if depth is None else depth
    with hier.f.ctx.local():
        return [float(hier[n].I_central.length) for n in range(1, depth + 1)]


def conjugacy_report(hier: Hierarchy, hier_t: Hierarchy, depth: int | None = None) -> ConjugacyReport:
    """Pairing, qs scan over |I^n|, and the multiplier table in one report."""
    report = match_critical_sets(hier, hier_t, depth)
    qs_ratio_scan(report, hierarchy_scales(hier, report.depth))
    rows, tau = multiplier_comparison(hier, hier_t, report.depth)
    report.multipliers = rows
    report.tau = tau
    return report
