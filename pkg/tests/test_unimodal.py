import numpy as np
import pytest
from gmpy2 import mpfr

from fibmaps.errors import CombinatoricsUnreachable, OrbitEscaped
from fibmaps.numerics import PrecisionContext
from fibmaps.unimodal import (
    PolynomialDiffeo,
    closest_returns,
    critical_orbit,
    cubic_family,
    evaluate,
    family_by_name,
    fibonacci_kneading,
    fibonacci_times,
    kneading_compare,
    locate_fibonacci_parameter,
    quadratic_family,
)

CTX = PrecisionContext(128)


def test_fibonacci_times():
    assert fibonacci_times(10) == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]


def test_fibonacci_kneading_prefix_and_cutting_times():
    k = fibonacci_kneading(30)
    # c_1 is the minimum value, left of c; c_2 lands right of c
    assert k[:2] == (-1, 1)
    assert set(k) <= {-1, 1}
    assert len(fibonacci_kneading(200)) == 200


def test_polynomial_diffeo_roundtrip():
    h = PolynomialDiffeo([0.5, 1.0, 0.0, 0.01])
    with CTX.local():
        w = h(mpfr("0.3"))
        assert abs(h.inverse(w) - mpfr("0.3")) < 1e-30
    assert h.deriv(2.0) == pytest.approx(1 + 3 * 0.01 * 4)
    dy = np.array([1e-3, 1e-3j, -2e-4 + 1e-4j])
    dw = h.delta(0.7, dy)
    assert np.allclose(h.delta_inverse(0.7, dw), dy, rtol=0, atol=1e-16)
    # delta avoids cancellation for tiny increments
    assert h.delta(0.7, 1e-20) == pytest.approx(1e-20 * h.deriv(0.7), rel=1e-12)


def test_polynomial_diffeo_rejects_constant():
    with pytest.raises(ValueError):
        PolynomialDiffeo([1.0])


def test_family_lookup():
    assert family_by_name("quadratic").epsilon == 0.0
    assert family_by_name("cubic", 0.02).epsilon == 0.02
    with pytest.raises(ValueError):
        family_by_name("quartic")


def test_full_map_escape_and_evaluate():
    fam = quadratic_family()
    f = fam.make(-2.5, CTX)
    with pytest.raises(OrbitEscaped):
        critical_orbit(f, 10)
    g = fam.make(-1.5, CTX)
    with pytest.raises(OrbitEscaped):
        evaluate(g, 5.0)
    with CTX.local():
        assert evaluate(g, 0) == mpfr(-1.5)


def test_kneading_compare_sides():
    fam = quadratic_family()
    target = fibonacci_kneading(20)
    lo = kneading_compare(fam.make(-2.2, CTX), target)[0]
    hi = kneading_compare(fam.make(-1.0, CTX), target)[0]
    # an escaping map compares like the full map, beyond every admissible kneading
    assert lo != 0 and hi != 0 and lo == -hi


def test_locate_quadratic_depth12():
    par = locate_fibonacci_parameter(quadratic_family(), 12, CTX)
    assert float(par.value) == pytest.approx(-1.8705, abs=5e-4)
    assert par.bracket[0] <= par.value <= par.bracket[1]
    assert par.width < 1e-15
    steps = [c for c in par.certificate if c["phase"] == "locate"]
    with CTX.local():
        widths = [mpfr(c["hi"]) - mpfr(c["lo"]) for c in steps]
    assert all(b < a for a, b in zip(widths, widths[1:]))


def test_located_map_has_fibonacci_closest_returns(small_map):
    rec = closest_returns(small_map, 300)
    assert rec.times == (1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233)


def test_cubic_family_reaches_fibonacci(cubic_map):
    rec = closest_returns(cubic_map, 400)
    assert rec.times[:12] == tuple(fibonacci_times(12))


def test_opposite_cubic_sign_is_unreachable():
    with pytest.raises(CombinatoricsUnreachable):
        locate_fibonacci_parameter(cubic_family(-0.01), 10, CTX)


def test_conjugated_map_orbit(small_map):
    g = small_map.conjugate(0.5, 0.1)
    a = critical_orbit(small_map, 20).values
    b = critical_orbit(g, 20).values
    with CTX.local():
        # the shift is the double 0.1, exactly as conjugate() converts it
        assert max(abs((x - mpfr(0.1)) * 2 - y) for x, y in zip(a, b)) < 1e-25


def test_conjugate_rejects_negative_scale(small_map):
    with pytest.raises(ValueError):
        small_map.conjugate(-1.0)
