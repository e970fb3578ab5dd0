import math

import numpy as np
import pytest

from fibmaps.complexext import (
    ComplexExtension,
    CriticalCollision,
    ThetaDomain,
    ab_extend,
    beltrami_ratio,
    central_itinerary,
    chord_arc_constant,
    chord_arc_diagnostic,
    disk_piece,
    disk_scaling_increment,
    figure1_report,
    forward_offsets,
    gamma_curve,
    julia_set,
    pull_back_piece,
    puzzle_hierarchy,
    repelling_fixed_point,
    rescale_piece,
    return_domains,
    theta_boundary,
)
from fibmaps.errors import QuadratureError
from fibmaps.numerics import GOLDEN, RealInterval, directed_hausdorff


def h_test(t):
    return t + 0.1 * t * t


def test_ab_extension_on_axis_identity_and_symmetry():
    assert ab_extend(h_test, 0.4) == h_test(0.4)
    z = 0.3 + 0.7j
    assert ab_extend(lambda t: t, z) == pytest.approx(z, abs=1e-14)
    assert ab_extend(h_test, z.conjugate()) == pytest.approx(ab_extend(h_test, z).conjugate(), abs=1e-14)


def test_ab_extension_errors():
    with pytest.raises(QuadratureError):
        ab_extend(lambda t: np.sin(1e5 * t), 0.3 + 0.2j)
    with pytest.raises(ValueError):
        ab_extend(h_test, 0.3 + 0.2j, rtol=1e-30)


def test_beltrami_ratio_decays_linearly():
    xs = np.linspace(-1, 1, 21)
    ys = [1e-1, 1e-2, 1e-3]
    worst = [max(beltrami_ratio(h_test, complex(x, y)) for x in xs) for y in ys]
    slope = np.polyfit(np.log(ys), np.log(worst), 1)[0]
    assert 0.8 <= slope <= 1.2


def test_exact_extension_is_holomorphic(deep_map):
    F = ComplexExtension(deep_map)
    z = np.array([0.3 + 0.2j, -1.1 + 0.5j])
    assert np.allclose(F(z), z * z + float(deep_map.t))
    with pytest.raises(ValueError):
        ComplexExtension(deep_map, "bogus")


def test_theta_domain_geometry():
    d = ThetaDomain(RealInterval(-1.0, 1.0), math.pi / 4)
    b = theta_boundary(d, 720)
    assert b.points.imag.max() == pytest.approx(d.apex_height, rel=1e-4)
    assert np.allclose(np.sort(b.points.imag), np.sort(-b.points.imag))
    disk = theta_boundary(ThetaDomain(RealInterval(-1.0, 1.0)), 720)
    assert np.allclose(np.abs(disk.points), 1.0)
    with pytest.raises(ValueError):
        ThetaDomain(RealInterval(-1.0, 1.0), 2.0)


def test_pull_back_left_inverse_and_symmetry(hier15):
    F = ComplexExtension(hier15.f)
    m = 6
    piece = disk_piece(hier15[m].I_central, hier15.f.c, m, 512)
    itin = central_itinerary(hier15, m + 1)
    new = pull_back_piece(F, piece, itin, max_edge=0.01)
    width = float(new.base.length)
    assert new.asymmetry() < 10 * 0.01 * width
    fwd = forward_offsets(F, new, itin)
    with hier15.f.ctx.local():
        shift = float(piece.anchor - itin.points[-1])
    orig = piece.offsets.points + shift
    assert directed_hausdorff(fwd, orig) < 10 * 0.01 * width
    lo, hi = new.real_trace()
    assert lo < 0 < hi


def test_pull_back_detects_missing_critical_value(hier15):
    F = ComplexExtension(hier15.f)
    m = 6
    itin = central_itinerary(hier15, m + 1)
    with hier15.f.ctx.local():
        end = itin.points[-1]
        w = hier15[m].half_width
        off = RealInterval(end + w / 10, end + w / 5)
    # a disk beside the orbit point cannot fold around the critical value
    with pytest.raises(CriticalCollision):
        pull_back_piece(F, disk_piece(off, end, m, 256), itin)


def test_julia_points_sit_on_the_escape_boundary():
    J = julia_set(-1, budget=20_000, seed=3)
    member = julia_set(-1, mode="escape_time", budget=300)
    g = np.linspace(-1, 1, 41)
    disk = (g[:, None] + 1j * g[None, :]).ravel()
    disk = disk[np.abs(disk) <= 1]
    z = J[::100]
    pts = z[:, None] + 0.005 * disk[None, :]
    inside = member(pts.ravel()).reshape(pts.shape)
    assert (inside.any(axis=1) & ~inside.all(axis=1)).all()
    assert abs(repelling_fixed_point(-1) - GOLDEN) < 1e-15
    assert np.array_equal(J, julia_set(-1, budget=20_000, seed=3))


def test_puzzle_pieces_approach_julia_set(hier15):
    F = ComplexExtension(hier15.f)
    pieces = puzzle_hierarchy(F, hier15, 4, 10)
    rescaled = [(p.level, rescale_piece(p)) for p in pieces[1:]]
    for _, poly in rescaled:
        x = np.sort(poly.points.real)
        assert x[0] == pytest.approx(-GOLDEN, abs=1e-2) and x[-1] == pytest.approx(GOLDEN, abs=1e-2)
    rep = figure1_report(rescaled, julia_set(-1, budget=50_000), samples=50_000)
    assert rep.monotone
    assert rep.distances[-1] < rep.distances[0]


def test_scaling_increment_settles(hier15):
    F = ComplexExtension(hier15.f)
    inc = [disk_scaling_increment(F, hier15, n) for n in range(4, 11)]
    diffs = np.abs(np.diff([r.increment for r in inc]))
    assert all(b < a for a, b in zip(diffs, diffs[1:]))
    assert np.polyfit(np.arange(len(diffs)), np.log(diffs), 1)[0] < 0
    for r in inc:
        assert r.increment < 0
        assert 0.4 < r.cover_fraction < 0.7


def test_half_disk_chord_arc_constant():
    c = chord_arc_constant(gamma_curve(0.0, 1.0, []), samples=800)
    assert c == pytest.approx(1 + math.pi / 2, abs=1e-2)


def test_return_domains_are_disjoint(hier15):
    target = hier15[5].I_central
    doms = return_domains(hier15.f, target, truncation=8)
    assert len(doms) == 8
    assert sum(d.critical for d in doms) == 1
    for a, b in zip(doms, doms[1:]):
        assert a.interval.disjoint(b.interval)


def test_chord_arc_constant_stable_under_truncation(hier15):
    F = ComplexExtension(hier15.f)
    c4 = chord_arc_diagnostic(F, hier15, 5, truncation=4).constant
    c8 = chord_arc_diagnostic(F, hier15, 5, truncation=8).constant
    assert 0.5 < c8 / c4 < 2
    assert c8 < 10
