import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mploss import lp_core
from mploss.dispatch import CANONICAL, parametric_day_ahead
from mploss.errors import DegenerateAtPoint, PointNotCovered
from mploss.mplp import (AffineMap, ParametricLP, RegionPartition, affine_eval, enumerate_regions, locate,
                         region_from_point, validate_partition)


def single_region():
    # min x s.t. x >= theta, x <= 10
    return ParametricLP([1.0], [[-1.0], [1.0]], [0.0, 10.0], [[-1.0], [0.0]], [0.0], [5.0])


def flex_toy(caps=(10.0, 40.0), costs=(40.0, 5.0), dirs=(1.0, -1.0), lower=-40.0, upper=10.0):
    """Real-time balancing with resources z_i in [0, cap_i] and sum(d_i z_i) = delta."""
    k = len(caps)
    d = np.asarray(dirs)
    G = np.vstack([np.eye(k), -np.eye(k), d, -d])
    w = np.r_[caps, np.zeros(k), 0.0, 0.0]
    F = np.r_[np.zeros(2 * k), 1.0, -1.0][:, None]
    return ParametricLP(costs, G, w, F, [lower], [upper])


def three_region_toy():
    return flex_toy((10.0, 30.0, 40.0), (40.0, 100.0, 5.0), (1.0, 1.0, -1.0), -28.0, 28.0)


def plane_toy():
    # min 2 x1 + 3 x2 s.t. x1 >= t1, x2 >= t2, x1 + x2 >= 1, x1 <= 1.5 over [-1, 1]^2
    G = [[-1, 0], [0, -1], [-1, -1], [1, 0]]
    F = [[-1, 0], [0, -1], [0, 0], [0, 0]]
    return ParametricLP([2.0, 3.0], G, [0, 0, -1, 1.5], F, [-1, -1], [1, 1])


def grid_slope_changes(plp, step):
    """Number of affine pieces of the optimal cost detected on a fine grid."""
    ts = np.arange(plp.lower[0], plp.upper[0] + step / 2, step)
    v = np.array([lp_core.solve(plp.at([t])).objective for t in ts])
    slopes = np.diff(v) / step
    return 1 + int(np.sum(np.abs(np.diff(slopes)) > 1e-6))


def test_single_region_map():
    reg = region_from_point(single_region(), [2.0])
    np.testing.assert_allclose(reg.map.slope, [[1.0]])
    np.testing.assert_allclose(reg.map.intercept, [0.0])
    assert reg.interval([0.0], [5.0]) == (0.0, 5.0)
    part = enumerate_regions(single_region())
    assert len(part) == 1
    assert locate(part, [4.2]) == 0
    assert validate_partition(part, 100).ok


def test_flex_toy_regions_from_points():
    plp = flex_toy()
    up = region_from_point(plp, [3.0])
    np.testing.assert_allclose(affine_eval(up.map, [7.0]), [7.0, 0.0])
    assert up.interval(plp.lower, plp.upper) == (0.0, 10.0)
    np.testing.assert_allclose(up.cost_affine[0], [40.0])
    down = region_from_point(plp, [-3.0])
    np.testing.assert_allclose(affine_eval(down.map, [-3.0]), [0.0, 3.0])
    assert down.interval(plp.lower, plp.upper) == (-40.0, 0.0)
    np.testing.assert_allclose(down.cost_affine[0], [-5.0])


def test_affine_eval_constant_map():
    amap = AffineMap(np.zeros((2, 1)), np.array([3.0, -1.0]))
    np.testing.assert_array_equal(affine_eval(amap, [123.0]), [3.0, -1.0])


def test_three_region_toy():
    plp = three_region_toy()
    part = enumerate_regions(plp)
    assert len(part) == 3 == grid_slope_changes(plp, 0.5)
    spans = sorted(r.interval(plp.lower, plp.upper) for r in part.regions)
    assert spans == [(-28.0, 0.0), (0.0, 10.0), (10.0, 28.0)]
    rid = locate(part, [5.0])
    np.testing.assert_allclose(affine_eval(part.regions[rid].map, [5.0]), [5.0, 0.0, 0.0], atol=1e-12)
    # boundary goes to the lowest adjacent id
    adjacent = [r.id for r in part.regions if r.contains([0.0])[0]]
    assert locate(part, [0.0]) == min(adjacent)
    assert validate_partition(part, 1000).ok


def test_region_ids_follow_discovery_order():
    part = enumerate_regions(three_region_toy())
    assert [r.id for r in part.regions] == list(range(len(part)))


def test_day_ahead_regions_match_grid():
    plp = parametric_day_ahead(CANONICAL)
    part = enumerate_regions(plp)
    assert len(part) == 2 == grid_slope_changes(plp, 0.25)
    spans = sorted(r.interval(plp.lower, plp.upper) for r in part.regions)
    assert spans == [(12.0, 30.0), (30.0, 60.0)]


def test_plane_toy_three_regions():
    plp = plane_toy()
    part = enumerate_regions(plp)
    assert len(part) == 3
    actives = sorted(r.active for r in part.regions)
    assert actives == [(0, 1), (1, 2), (2, 3)]
    rep = validate_partition(part, 2000, seed=4)
    assert rep.ok, rep.failures[:3]
    # hand maps
    t = np.array([0.8, 0.6])
    np.testing.assert_allclose(affine_eval(part.regions[locate(part, t)].map, t), [0.8, 0.6])
    t = np.array([0.0, 0.2])
    np.testing.assert_allclose(affine_eval(part.regions[locate(part, t)].map, t), [0.8, 0.2])
    t = np.array([0.0, -0.9])
    np.testing.assert_allclose(affine_eval(part.regions[locate(part, t)].map, t), [1.5, -0.5])


def test_truncated_partition_reports_uncovered():
    part = enumerate_regions(three_region_toy())
    cut = RegionPartition(part.regions[1:], part.lower, part.upper, part.plp)
    rep = validate_partition(cut, 500)
    assert not rep.ok
    assert any(kind == "not_covered" for kind, *_ in rep.failures)
    lost = part.regions[0]
    lo, hi = lost.interval(part.lower, part.upper)
    with pytest.raises(PointNotCovered):
        locate(cut, [0.5 * (lo + hi)])


def test_degenerate_parametric_lp_aborts_with_witness():
    plp = flex_toy(caps=(10.0, 10.0, 40.0), costs=(40.0, 40.0, 5.0), dirs=(1.0, 1.0, -1.0), lower=-20.0, upper=20.0)
    with pytest.raises(DegenerateAtPoint) as exc:
        enumerate_regions(plp)
    assert len(exc.value.theta) == 1


def test_affine_maps_exact_on_interior_samples():
    rng = np.random.default_rng(7)
    for plp in (three_region_toy(), plane_toy()):
        part = enumerate_regions(plp)
        for reg in part.regions:
            pts = plp.lower + rng.random((4000, plp.dim)) * (plp.upper - plp.lower)
            pts = pts[reg.contains(pts, tol=-1e-6)][:50]
            assert len(pts) > 0
            for t in pts:
                sol = lp_core.solve(plp.at(t))
                assert np.max(np.abs(affine_eval(reg.map, t) - sol.x_star)) <= 1e-6
                assert sol.active == reg.active


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
def test_value_function_convex_along_segments(a, b):
    plp = plane_toy()
    a, b = np.array(a), np.array(b)
    v = np.array([lp_core.solve(plp.at(a + s * (b - a))).objective for s in np.linspace(0, 1, 100)])
    assert np.all(v[:-2] - 2 * v[1:-1] + v[2:] >= -1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 20.0), st.floats(1.0, 30.0), st.floats(1.0, 50.0))
def test_region_count_matches_grid(up1, up2, down):
    plp = flex_toy((up1, up2, down), (40.0, 100.0, 5.0), (1.0, 1.0, -1.0), -0.9 * down, up1 + 0.9 * up2)
    part = enumerate_regions(plp)
    assert len(part) == 3
    assert validate_partition(part, 300).ok


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_plane_partition_covers_exactly_once_with_tie_break(t):
    part = enumerate_regions(plane_toy())
    rid = locate(part, t)
    hits = [r.id for r in part.regions if r.contains(t)[0]]
    assert rid == min(hits)
