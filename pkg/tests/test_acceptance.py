"""Acceptance suite: one test per criterion, summarised as PASS/FAIL lines at the end of the run."""

import math

import numpy as np
import pytest

from fibmaps import report as rpt
from fibmaps.cli import main
from fibmaps.complexext import (ComplexExtension, beltrami_ratio, figure1_report, julia_set,
                                puzzle_hierarchy, rescale_piece)
from fibmaps.conjugacy import conjugacy_report, rho_table, smoothness_diagnostic
from fibmaps.numerics import GOLDEN, PrecisionContext
from fibmaps.renorm import (check_level_properties, rescaled_map_values, scaling_table,
                            sup_deviation_from_quadratic)
from fibmaps.thurston import MarkedTriple, contraction_constant, iterate_to_fixed_point
from fibmaps.unimodal import closest_returns, fibonacci_times


@pytest.mark.criterion(1, "closest returns at Fibonacci times")
def test_criterion_1_fibonacci_combinatorics(deep_map):
    rec = closest_returns(deep_map, 10_000)
    S = fibonacci_times(30)
    assert rec.times == tuple(S[: len(rec.times)])
    assert rec.times[-1] == 6765


@pytest.mark.criterion(2, "scaling law slope and mu ratio")
def test_criterion_2_scaling_law(hier15):
    assert hier15.f.ctx.bits == 256
    table = scaling_table(hier15, fit_from=8)
    assert table.fit_range == (8, 15)
    assert -0.36 <= table.slope <= -0.31
    ratio3 = [r.ratio3 for r in table.rows if r.ratio3 is not None][-1]
    assert 0.42 <= ratio3 <= 0.58


@pytest.mark.criterion(3, "rescaled return maps approach z^2-1")
def test_criterion_3_convergence_to_quadratic(hier15):
    assert sup_deviation_from_quadratic(hier15, 14, 101) < sup_deviation_from_quadratic(hier15, 8, 101)
    assert abs(rescaled_map_values(hier15, 14, [0.0])[0] + 1) < 0.05


@pytest.mark.criterion(4, "pull-back iteration converges to -1")
def test_criterion_4_thurston_fixed_point():
    ctx = PrecisionContext(128)
    run = iterate_to_fixed_point(MarkedTriple(-0.5, ctx))
    assert run.steps <= 60
    with ctx.local():
        assert abs(run.limit.gamma + 1) < 1e-20
    assert abs(run.asymptotic_rate - 1 / (2 * GOLDEN)) < 1e-3
    assert contraction_constant() == pytest.approx(0.3090170, abs=1e-7)


@pytest.mark.criterion(5, "puzzle pieces approach the Julia set")
def test_criterion_5_figure1(hier15, tmp_path):
    F = ComplexExtension(hier15.f)
    pieces = puzzle_hierarchy(F, hier15, 4, 12)
    rescaled = [(p.level, rescale_piece(p)) for p in pieces[1:]]
    julia = julia_set(-1, budget=100_000)
    assert len(julia) == 100_000
    rep = figure1_report(rescaled, julia, samples=100_000)
    assert rep.longest_decreasing_run >= 3
    paths = rpt.plot_figure1(rescaled[-1:], julia, GOLDEN, tmp_path / "figure1")
    svg = [p for p in paths if p.suffix == ".svg"][0]
    assert svg.stat().st_size > 0


@pytest.mark.criterion(6, "return-map properties at every level")
def test_criterion_6_property_suite(hier15):
    failures = []
    for n in range(1, hier15.depth + 1):
        failures += check_level_properties(hier15.f, hier15[n], hier15[n - 1].I_central, hier15.orbit)
    assert failures == []


@pytest.mark.criterion(7, "extension is asymptotically conformal")
def test_criterion_7_asymptotic_conformality():
    def h(t):
        return t + 0.1 * t * t

    xs = np.linspace(-1, 1, 21)
    ys = [1e-1, 1e-2, 1e-3]
    worst = [max(beltrami_ratio(h, complex(x, y)) for x in xs) for y in ys]
    slope = np.polyfit(np.log(ys), np.log(worst), 1)[0]
    assert 0.8 <= slope <= 1.2


@pytest.mark.criterion(8, "identity and affine conjugacy oracles")
def test_criterion_8_conjugacy_oracles(hier10, affine_hier10):
    scales = [0.2, 0.1]
    for partner, slope in ((hier10, 1.0), (affine_hier10, 2.0)):
        rep = conjugacy_report(hier10, partner)
        assert rep.qs and all(abs(m - 1) < 1e-10 for _, m in rep.qs)
        diag = smoothness_diagnostic(rep, hier10, partner, shadowing_scales=scales)
        assert all(q < 1e-12 for _, _, q in diag.ratio_distortion)
        assert all(math.isclose(r[2], slope, rel_tol=1e-12) for r in rho_table(rep))
        assert all(s == st for _, s, st, _ in rep.multipliers)


@pytest.mark.criterion(9, "repeated CLI runs are byte-identical")
def test_criterion_9_determinism(tmp_path):
    runs = {
        "find-parameter": ["--depth", "8"],
        "renorm": ["--depth", "8"],
        "thurston": [],
        "figure1": ["--depth", "7", "--budget", "3000"],
        "conjugacy": ["--depth", "6", "--partner", "affine"],
    }
    for verb, args in runs.items():
        a, b = tmp_path / "a" / verb, tmp_path / "b" / verb
        assert main([verb, *args, "--out", str(a)]) == 0
        assert main([verb, *args, "--out", str(b)]) == 0
        names = sorted(p.name for p in a.iterdir() if p.suffix in (".csv", ".json") and p.name != "manifest.json")
        assert names
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes(), (verb, name)
