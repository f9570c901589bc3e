import math

import numpy as np
import pytest

from oracles import five_point_jacobian, rel_err

from ltlab import diagnostics as dg
from ltlab.bipolar import from_torus, in_R
from ltlab.cones import ConeId, in_cone
from ltlab.errors import NonFiniteAccumulation, PointBudgetExceeded, SeamEncounter
from ltlab.geometry import m_plus, sample_annuli
from ltlab.twist import theta_map


def test_orbit_streams_are_reproducible_and_distinct():
    a = dg.orbit_rng(5, 2, 0).random(4)
    assert np.array_equal(a, dg.orbit_rng(5, 2, 0).random(4))
    assert not np.array_equal(a, dg.orbit_rng(5, 3, 0).random(4))
    assert not np.array_equal(a, dg.orbit_rng(5, 2, 1).random(4))


def test_draw_start_avoids_seams(ann):
    rng = dg.orbit_rng(0)
    for _ in range(50):
        u, v = dg.draw_start(rng, ann, "plane", margin=1e-3)
        assert dg.plane_seam_distance(u, v, ann) >= 1e-3
        x, y = dg.draw_start(rng, ann, "torus", margin=1e-3)
        assert dg.torus_seam_distance(x, y, ann) >= 1e-3


def test_fd_jacobian_against_fourth_order_oracle(rng, ann):
    u, v = sample_annuli(rng, 4000, ann)
    keep = dg.plane_seam_distance(u, v, ann) > 1e-3
    u, v = u[keep], v[keep]
    fu, fv, J = dg.theta_fd_jacobian(u, v, ann)
    assert np.allclose((fu, fv), theta_map(u, v, ann), atol=0)
    ref = five_point_jacobian(lambda a, b: theta_map(a, b, ann), u, v)
    assert rel_err(np.stack(J, -1), ref).max() < 1e-6
    a11, a12, a21, a22 = J
    assert np.median(np.abs(a11 * a22 - a12 * a21 - 1.0)) < 1e-8


def test_fd_jacobian_one_sided_near_seam(ann):
    # 1e-7 inside the outer circle of A+, where that circle runs through A-:
    # the central stencil would straddle the circle
    p = [np.array([c]) for c in m_plus(ann.r1 - 1e-7, 1.0)]
    far = [np.array([c]) for c in m_plus(ann.r1 - 1e-4, 1.0)]
    _, _, J = dg.theta_fd_jacobian(*p, ann)
    _, _, Jfar = dg.theta_fd_jacobian(*far, ann)
    # one-sided quotients are first order: the determinant is 1 relative to |J|^2
    det = J[0][0] * J[3][0] - J[1][0] * J[2][0]
    assert abs(det - 1.0) < 1e-4 * sum(float(a[0]) ** 2 for a in J)
    assert np.allclose(np.ravel(J), np.ravel(Jfar), rtol=5e-2)
    # the central quotient across the circle is far off
    h = dg.FD_STEP
    fu, _ = theta_map(p[0] + h, p[1], ann)
    bu, _ = theta_map(p[0] - h, p[1], ann)
    assert abs((fu - bu)[0] / (2 * h) - J[0][0]) > 1e-3


def test_lyapunov_short_run(ann):
    est = dg.lyapunov_orbits(1, 4, 2000, 200, ann)
    for e in est:
        assert e.lambda1 > 0
        assert abs(e.lambda1 + e.lambda2) < 1e-3
    assert [e.orbit for e in est] == [0, 1, 2, 3]
    single = dg.lyapunov(1, 2000, 200, ann, orbit=2)
    assert single.lambda1 == est[2].lambda1


def test_lyapunov_frames_agree_roughly(ann):
    p = dg.lyapunov_orbits(2, 20, 3000, 300, ann, "plane")
    t = dg.lyapunov_orbits(2, 20, 3000, 300, ann, "torus")
    mp = np.mean([e.lambda1 for e in p])
    mt = np.mean([e.lambda1 for e in t])
    assert mp == pytest.approx(mt, rel=0.1)


def test_lyapunov_threads_independent(ann):
    idx = list(range(dg.BATCH - 2, dg.BATCH + 2))
    a = dg.lyapunov_orbits(0, idx, 1000, 100, ann, "torus", threads=1)
    b = dg.lyapunov_orbits(0, idx, 1000, 100, ann, "torus", threads=2)
    assert [(e.lambda1, e.lambda2) for e in a] == [(e.lambda1, e.lambda2) for e in b]


def test_lyapunov_validation(ann):
    with pytest.raises(ValueError):
        dg.lyapunov_orbits(0, 1, 500, 10, ann)
    with pytest.raises(ValueError):
        dg.LyapunovEstimate(0.1, -0.1, 100, 100, 0)


def test_reseed_exhaustion():
    calls = []

    def runner(pairs):
        calls.append(list(pairs))
        return [None] * len(pairs)

    with pytest.raises(SeamEncounter):
        dg._run_orbits([0, 1], runner, 2, 1)
    assert [p[0][1] for p in calls] == [0, 1, 2]


def test_reseed_recovers():
    def runner(pairs):
        return [None if (i == 1 and att == 0) else (i, att) for i, att in pairs]

    assert dg._run_orbits([0, 1, 2], runner, 3, 1) == [(0, 0), (1, 1), (2, 0)]


def test_alignment_forward_backward_and_cone(ann):
    for inverse in (False, True):
        res = dg.alignment_orbits(4, 5, 1500, 500, ann, inverse)
        assert all(r.fraction == 1.0 for r in res)
        assert res[0].cone == ("C~" if inverse else "C")
    res = dg.alignment_orbits(4, 5, 300, 0, ann, initial="cone")
    assert all(r.fraction == 1.0 for r in res)
    assert dg.alignment_check(4, 1500, 500, ann, orbit=1) == 1.0


def test_estimated_directions_lie_in_cones(ann):
    rng = dg.orbit_rng(9)
    for _ in range(10):
        x, y = dg.draw_start(rng, ann, "torus")
        assert in_cone(*dg.estimate_direction(x, y, ann, True), ConeId.C)
        assert in_cone(*dg.estimate_direction(x, y, ann, False), ConeId.CTilde)


def test_planar_segment_stretch_matches_dense_sampling(ann):
    seg = dg.CurveRecord.segment((-1 - ann.r1, 0.0), (-3.0, 0.0), 200)
    rec = dg.stretch_curve(seg, 1, "theta_plane", 1e-3, ann)
    u = np.linspace(-1 - ann.r1, -3.0, 2 * 10**5)
    dense = dg.polyline_length(*theta_map(u, np.zeros_like(u), ann))
    assert rec.lengths_per_iterate[1] >= rec.lengths_per_iterate[0]
    assert rec.lengths_per_iterate[1] == pytest.approx(dense, rel=1e-3)


def test_short_segment_grows_tenfold(ann):
    seg = dg.CurveRecord.segment((-3.3, 0.0), (-3.3 + 1e-6, 0.0), 2)
    rec = dg.stretch_curve(seg, 10, "theta_plane", 1e-3, ann)
    assert rec.lengths_per_iterate[-1] > 10 * rec.lengths_per_iterate[0]


def test_boundary_arc_length_constant(ann):
    t = np.linspace(2.6, 3.6, 5000)
    u, v = m_plus(np.full_like(t, ann.r1), t)  # outer arc of A+ away from A-
    rec = dg.stretch_curve(dg.CurveRecord(u, v), 5, "theta_plane", 1e-3, ann)
    assert np.allclose(rec.lengths_per_iterate, rec.lengths_per_iterate[0], rtol=1e-12)


def test_point_budget(ann):
    seg = dg.CurveRecord.segment((-3.3, 0.0), (-3.2, 0.0), 2)
    with pytest.raises(PointBudgetExceeded):
        dg.stretch_curve(seg, 6, "theta_plane", 1e-4, ann, max_points=1000)


def test_torus_stretch_stays_in_R(ann):
    _, seg = dg.seed_segment(3, ann, True, 1e-4)
    rec = dg.stretch_curve(seg, 6, "h_torus", 1e-2, ann)
    assert np.all(in_R(rec.a, rec.b, ann))
    assert rec.lengths_per_iterate[-1] > rec.lengths_per_iterate[0]
    # the curve is unbroken in the plane
    u, v = from_torus(rec.a, rec.b, ann)
    assert np.max(np.hypot(np.diff(u), np.diff(v))) <= 1e-2 + 1e-12


def test_chart_jumps_and_torus_length(ann):
    # A+ chart at y < 0 next to an A- point is a jump; next to y > 0 it is not
    x = np.array([2.3, 0.5])
    assert dg.chart_jumps(x, np.array([-2.3, -2.3]), ann)[0]
    assert not dg.chart_jumps(x, np.array([2.3, 2.3]), ann)[0]
    a = np.array([3.0, -3.0])
    b = np.array([2.3, 2.3])
    assert dg.polyline_length(a, b, "torus", ann) == pytest.approx(2 * math.pi - 6.0)


def test_curves_intersect_synthetic(ann):
    x = np.linspace(2.1, 2.5, 20)
    w = dg.curves_intersect(x, np.full_like(x, 2.3), np.full_like(x, 2.3), np.linspace(2.1, 2.5, 20), ann)
    assert w == pytest.approx((2.3, 2.3))
    assert dg.curves_intersect(x, np.full_like(x, 2.2), x, np.full_like(x, 2.4), ann) is None


def test_chords_in_cone(ann):
    x = np.linspace(2.1, 2.5, 10)
    assert dg.chords_in_cone(x, x, ConeId.C, ann)
    assert not dg.chords_in_cone(x, -x, ConeId.C, ann)
    assert dg.chords_in_cone(x, -x, ConeId.CTilde, ann)


def test_intersection_examples(ann):
    assert not dg.intersection_experiment(0, 1, 0, 0, ann).intersects
    res = dg.minimal_intersection(0, 1, 1000, ann)
    assert res.intersects and res.u_in_cone and res.s_in_cone
    assert 1 <= res.m <= 1000 and 1 <= res.n <= 1000
    again = dg.intersection_experiment(0, 1, res.m, res.n, ann)
    assert again.intersects
    with pytest.raises(ValueError):
        dg.intersection_experiment(0, 1, -1, 0, ann)


def test_mixing_small(ann):
    var = dg.mixing_decay(32, 6, 10**5, 0, ann)
    assert len(var) == 7 and np.all(np.isfinite(var))
    assert var[-1] < var[0]
    ident = dg.mixing_decay(32, 6, 10**5, 0, ann, map_name="identity")
    assert np.all(np.array(ident) == ident[0])
    with pytest.raises(ValueError):
        dg.mixing_decay(8, 2, 10**5)


def test_mixing_non_finite_guard(monkeypatch, ann):
    monkeypatch.setattr(dg, "_map_fn", lambda name, ann: lambda u, v: (u * np.nan, v))
    with pytest.raises(NonFiniteAccumulation):
        dg.mixing_decay(16, 1, 10**5, 0, ann)
