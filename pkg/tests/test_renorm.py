import numpy as np
import pytest

from fibmaps.errors import InsufficientPrecision, NotFibonacciRegime
from fibmaps.numerics import PrecisionContext
from fibmaps.renorm import (
    branch_multipliers,
    build_hierarchy,
    build_I0,
    check_level_properties,
    default_samples,
    finite_difference_check,
    rescaled_derivative_values,
    rescaled_map_values,
    scaling_table,
    sup_deviation_from_quadratic,
)
from fibmaps.unimodal import fibonacci_times, locate_fibonacci_parameter, quadratic_family


def test_return_times_are_fibonacci(hier15):
    S = fibonacci_times(20)
    for n in range(1, hier15.depth + 1):
        assert (hier15[n].time_side, hier15[n].time_central) == (S[n], S[n + 1])


def test_property_suite_every_level(hier15):
    f = hier15.f
    for n in range(1, hier15.depth + 1):
        assert check_level_properties(f, hier15[n], hier15[n - 1].I_central, hier15.orbit) == [], n


def test_intervals_shrink_and_mu_matches(hier15):
    with hier15.f.ctx.local():
        for n in range(1, hier15.depth + 1):
            ratio = float(hier15[n].I_central.length / hier15[n - 1].I_central.length)
            assert hier15[n].mu == pytest.approx(ratio, rel=1e-12)
            assert 0 < ratio < 1


def test_I0_needs_reversing_fixed_point():
    ctx = PrecisionContext(128)
    # f(x) = x^2 - 0.1 has an attracting fixed point and no alpha with f' < -1
    with pytest.raises(NotFibonacciRegime):
        build_I0(quadratic_family().make(-0.1, ctx))


def test_scaling_slope_and_ratio(hier15):
    table = scaling_table(hier15, fit_from=8)
    assert -0.36 <= table.slope <= -0.31
    ratio3 = [r.ratio3 for r in table.rows if r.ratio3 is not None][-1]
    assert 0.42 <= ratio3 <= 0.58


def test_side_multipliers_alternate_and_grow(hier15):
    sig = [branch_multipliers(hier15, n)[1] for n in range(1, 9)]
    assert all(s is not None for s in sig)
    signs = [1 if s > 0 else -1 for s in sig]
    assert all(a == -b for a, b in zip(signs, signs[1:]))
    assert all(abs(b) > abs(a) for a, b in zip(sig[2:], sig[3:]))


def test_multipliers_invariant_under_affine_conjugation(hier10, affine_hier10):
    for n in (3, 6, 9):
        a, b = branch_multipliers(hier10, n), branch_multipliers(affine_hier10, n)
        assert float(a[1]) == pytest.approx(float(b[1]), rel=1e-20)


def test_rescaled_maps_approach_quadratic(hier15):
    d8 = sup_deviation_from_quadratic(hier15, 8)
    d14 = sup_deviation_from_quadratic(hier15, 14)
    assert d14 < d8
    g0 = rescaled_map_values(hier15, 14, [0.0])[0]
    assert abs(g0 + 1) < 0.05


def test_rescaled_map_fixes_T_boundary(hier15):
    x = default_samples(5)
    vals = rescaled_map_values(hier15, 12, x)
    # G_n is even about 0 up to the asymmetry of h, with G_n(0) near -1
    assert np.allclose(vals, vals[::-1], atol=1e-2)
    with pytest.raises(ValueError):
        rescaled_map_values(hier15, 12, [2.0])


def test_chain_rule_matches_finite_difference(hier15):
    with hier15.f.ctx.local():
        x = hier15.f.c + hier15[10].half_width / 3
    assert finite_difference_check(hier15, 10, x) < 1e-12
    d = rescaled_derivative_values(hier15, 10, [0.0, 0.5])
    assert abs(d[0]) < 1e-12 and d[1] > 0


def test_low_precision_is_reported():
    ctx = PrecisionContext(64)
    fam = quadratic_family()
    with pytest.raises(InsufficientPrecision) as exc:
        par = locate_fibonacci_parameter(fam, 19, ctx)
        build_hierarchy(par.make_map(fam, ctx), 15)
    assert "insufficient precision" in str(exc.value)
