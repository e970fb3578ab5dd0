import math

import numpy as np
import pytest

from fibmaps.numerics import (
    GOLDEN,
    PrecisionContext,
    Polyline,
    RealInterval,
    contains_points,
    directed_hausdorff,
    golden,
    hausdorff_distance,
    real_axis_crossings,
    refine_polyline,
    winding_numbers,
)


def circle(r=1.0, n=400, centre=0j):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return centre + r * np.exp(1j * t)


def test_precision_context_validation():
    with pytest.raises(ValueError):
        PrecisionContext(bits=32)
    with pytest.raises(ValueError):
        PrecisionContext(escape_radius=1.0)
    with pytest.raises(ValueError):
        PrecisionContext(max_iters=0)


def test_local_context_sets_precision():
    ctx = PrecisionContext(200)
    x = ctx.real(1) / 3
    with ctx.local():
        y = ctx.real(1) / 3
    assert y.precision == 200
    # arithmetic outside local() falls back to double precision
    assert x.precision == 53
    assert ctx.unit_roundoff == 2.0 ** -199


def test_golden_constant():
    ctx = PrecisionContext(256)
    a = golden(ctx)
    with ctx.local():
        assert abs(a * a - a - 1) < 2 ** -250
    assert GOLDEN == pytest.approx((1 + math.sqrt(5)) / 2, rel=0, abs=1e-15)


def test_real_interval_basics():
    I = RealInterval(-1.0, 3.0)
    assert I.length == 4.0 and I.center == 1.0
    assert 0.0 in I and 3.0 not in I
    assert I.contains_interval(RealInterval(-1.0, 2.0))
    assert not I.contains_interval(RealInterval(-1.0, 2.0), strict=True)
    assert I.disjoint(RealInterval(3.0, 4.0))
    assert I.scaled(0.5).as_floats() == (0.0, 2.0)
    with pytest.raises(ValueError):
        RealInterval(1.0, 1.0)


def test_polyline_validation():
    with pytest.raises(ValueError):
        Polyline(np.array([0, 1]), closed=True)
    with pytest.raises(ValueError):
        Polyline(circle(n=4), params=np.array([0.0, 0.5, 0.4, 0.9]))


def test_refine_polyline_edge_bound_and_interpolation():
    p = Polyline(np.array([0, 1, 1 + 1j]))
    q = refine_polyline(p, 0.1)
    assert q.edge_lengths().max() <= 0.1 + 1e-12
    assert q.length == pytest.approx(p.length)
    assert np.all(np.diff(q.params) > 0)
    # inserted points lie on the original edges
    on_edges = (np.abs(q.points.imag) < 1e-12) | (np.abs(q.points.real - 1) < 1e-12) | \
               (np.abs(q.points.real - q.points.imag) < 1e-12)
    assert on_edges.all()


def test_polyline_length_diameter_resample():
    p = Polyline(circle(2.0, 2000))
    assert p.length == pytest.approx(4 * np.pi, rel=1e-5)
    assert p.diameter == pytest.approx(4.0, rel=1e-6)
    pts = p.resample(100)
    assert np.allclose(np.abs(pts), 2.0, atol=1e-4)


def test_hausdorff_concentric_circles():
    a, b = circle(1.0, 2000), circle(2.0, 2000)
    assert hausdorff_distance(a, b) == pytest.approx(1.0, abs=1e-9)
    assert directed_hausdorff(a, a) == 0.0
    with pytest.raises(ValueError):
        directed_hausdorff(a, np.array([]))


def test_hausdorff_accepts_xy_arrays():
    a = np.array([[0.0, 0.0], [1.0, 0.0]])
    b = np.array([[0.0, 3.0]])
    assert hausdorff_distance(a, b) == pytest.approx(math.sqrt(10))


def test_winding_numbers_and_containment():
    c = circle(1.0, 64)
    w = winding_numbers(c, np.array([0, 0.5j, 2, -3j]))
    assert list(w) == [1, 1, 0, 0]
    assert list(winding_numbers(c[::-1], np.array([0]))) == [-1]
    assert contains_points(Polyline(c), np.array([0.2 + 0.2j]))[0]


def test_real_axis_crossings_circle():
    x = real_axis_crossings(Polyline(circle(1.5, 401, centre=0.25)))
    # vertices straddle the axis on the left, so that crossing is a chord
    assert x[0] == pytest.approx(-1.25, abs=1e-4) and x[-1] == pytest.approx(1.75, abs=1e-12)
