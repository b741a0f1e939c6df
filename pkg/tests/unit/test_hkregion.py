import logging
import math

import numpy as np
import pytest

from hkgic.lib.hkregion import R_COORDS
from hkgic.lib.hkregion import balanced_point
from hkgic.lib.hkregion import build_instance
from hkgic.lib.hkregion import check_grid
from hkgic.lib.hkregion import default_mu_sweep
from hkgic.lib.hkregion import no_interference_rectangle
from hkgic.lib.hkregion import optimize_weighted
from hkgic.lib.hkregion import project_r1r2
from hkgic.lib.hkregion import region_sweep
from hkgic.lib.hkregion import region_union
from hkgic.lib.hkregion import split_grid
from hkgic.lib.hkregion import trace_boundary
from hkgic.lib.hkregion import user_rate_objective
from hkgic.lib.hkregion import weights_for
from hkgic.lib.miterms import RATE_COORDS
from hkgic.lib.models import DomainError
from hkgic.lib.models import PowerSplit
from hkgic.lib.models import RateTuple4
from hkgic.lib.models import awgn_capacity
from hkgic.lib.polytope import is_feasible
from hkgic.lib.polytope import maximize
from hkgic.lib.polytope import maximize_value
from tests.factories import log_uniform
from tests.factories import make_channel
from tests.factories import make_instance
from tests.factories import random_instance

logger = logging.getLogger(__name__)

MU_VALUES = (0.0, 0.5, 1.0, 2.0, 10.0)


def rates_feasible(inst, r1: float, r2: float) -> bool:
    """4-d oracle: some layer rates in the HK polytope sum to (r1, r2)"""
    link = np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]])
    poly = inst.polytope.add_rows(np.vstack([link, -link]), [r1, r2, -r1, -r2], ["r1", "r2", "-r1", "-r2"])
    return is_feasible(poly)


def best_grid_value(ch, objective, grid_k: int) -> float:
    return max(maximize_value(build_instance(ch, g.split).polytope, objective) for g in split_grid(ch, grid_k))


def assert_region_inside(inner, outer, tol=1e-9):
    for v in inner.vertices:
        assert outer.contains(v, tol), f"{v} outside by {outer.distance_outside(v)}"


def test_instance_contract():
    inst = make_instance()
    assert inst.polytope.coords == RATE_COORDS
    assert inst.polytope.n_rows == 18
    assert inst.polytope.labels[:14] == tuple(f"HK{i}" for i in range(1, 15))
    assert inst.polytope.contains((0.0, 0.0, 0.0, 0.0))


def test_interference_free_private_rate():
    ch = make_channel(p1=3.0, p2=2.0, a=0.0, b=0.0)
    inst = build_instance(ch, PowerSplit.all_private(ch))
    assert maximize_value(inst.polytope, [0, 0, 1, 0]) == pytest.approx(awgn_capacity(3.0), abs=1e-12)


def test_unit_gain_sum_term():
    ch = make_channel(p1=1.0, p2=1.0, a=1.0, b=1.0)
    inst = build_instance(ch, PowerSplit.all_private(ch))
    value = maximize_value(inst.polytope, [1, 1, 1, 0])
    assert value == pytest.approx(0.5 * math.log2(1.5), abs=1e-12)


def test_origin_always_feasible(rng):
    for _ in range(50):
        assert random_instance(rng).polytope.contains((0.0,) * 4)


@pytest.mark.parametrize("draw", range(10))
def test_no_interference_rectangle_recovered(draw):
    rng = np.random.default_rng(draw)
    p1, p2, n1, n2 = (float(x) for x in log_uniform(rng, size=4))
    ch = make_channel(p1=p1, p2=p2, a=0.0, b=0.0, n1=n1, n2=n2)
    region = project_r1r2(build_instance(ch, PowerSplit.all_private(ch)))
    c1, c2 = awgn_capacity(p1 / n1), awgn_capacity(p2 / n2)
    assert len(region.vertices) == 4
    np.testing.assert_allclose(region.points, [(0, 0), (c1, 0), (c1, c2), (0, c2)], atol=1e-12)


def test_projection_symmetric_under_swap():
    inst = make_instance(p1=2.0, p2=2.0, a=0.6, b=0.6, lam1=0.4, lam2=0.4)
    region = project_r1r2(inst)
    mirrored = region.swapped()
    assert mirrored.coords == ("r2", "r1")
    np.testing.assert_allclose(mirrored.points, region.points, atol=1e-9)


def test_projection_matches_channel_swap():
    inst = make_instance(p1=3.0, p2=1.0, a=0.2, b=1.4, n1=1.0, n2=0.5, lam1=0.3, lam2=0.8)
    region = project_r1r2(inst)
    swapped = project_r1r2(inst.swapped())
    np.testing.assert_allclose(swapped.points, region.swapped().points, atol=1e-9)


def test_projection_agrees_with_lp_oracle(rng):
    for _ in range(4):
        inst = random_instance(rng, 0.1, 10.0)
        region = project_r1r2(inst)
        x0, y0, x1, y1 = region.bounding_box()
        pts = rng.uniform([x0 - 0.1, y0 - 0.1], [x1 + 0.1, y1 + 0.1], size=(60, 2))
        for r1, r2 in pts:
            dist = region.distance_outside((r1, r2))
            if abs(dist) < 1e-6:
                continue
            assert (dist < 0) == rates_feasible(inst, float(r1), float(r2))


def test_projection_downward_closed(rng):
    inst = make_instance(lam1=0.7, lam2=0.2)
    region = project_r1r2(inst)
    for v in region.points:
        for factor in rng.uniform(0.0, 1.0, size=(5, 2)):
            assert region.contains(v * factor, 1e-9)


def test_projection_scale_covariant():
    inst = make_instance(p1=2.0, p2=5.0, a=0.3, b=0.9, n1=1.0, n2=2.0, lam1=0.5, lam2=0.25)
    scaled = build_instance(inst.channel.scaled(7.0), inst.split.scaled(7.0))
    np.testing.assert_allclose(scaled.bounds.values, inst.bounds.values, atol=1e-12)
    np.testing.assert_allclose(project_r1r2(scaled).points, project_r1r2(inst).points, atol=1e-9)


def test_lp_matches_projected_vertices(rng):
    for _ in range(50):
        inst = random_instance(rng, 0.1, 10.0)
        region = project_r1r2(inst)
        for mu in MU_VALUES:
            lp = maximize_value(inst.polytope, user_rate_objective(1.0, mu))
            vertex = float(np.max(region.points @ np.array([1.0, mu])))
            assert lp == pytest.approx(vertex, abs=1e-9)


@pytest.mark.parametrize("mu,expected", [(0.0, (1.0, 0.0)), (2.5, (1.0, 2.5)), (math.inf, (0.0, 1.0))])
def test_weights_for(mu, expected):
    assert weights_for(mu) == expected


@pytest.mark.parametrize("mu", [-1.0, math.nan])
def test_weights_for_rejects(mu):
    with pytest.raises(DomainError):
        weights_for(mu)


@pytest.mark.parametrize("grid_k", [1, 0, 2.5, True, "3"])
def test_check_grid_rejects(grid_k):
    with pytest.raises(DomainError, match="grid_k"):
        check_grid(grid_k)


def test_split_grid_order():
    ch = make_channel(p1=2.0, p2=4.0)
    grid = split_grid(ch, 3)
    assert [(g.lam1, g.lam2) for g in grid] == [(a, b) for a in (0.0, 0.5, 1.0) for b in (0.0, 0.5, 1.0)]
    assert grid[5].split == PowerSplit(pu1=1.0, pv1=1.0, pu2=0.0, pv2=4.0)


def test_optimize_weighted_interference_free():
    ch = make_channel(p1=1.0, p2=3.0, a=0.0, b=0.0)
    entry = optimize_weighted(ch, 1.0, 3)
    assert (entry.lam1, entry.lam2) == (1.0, 1.0)
    assert entry.objective_value == pytest.approx(awgn_capacity(1.0) + awgn_capacity(3.0), abs=1e-8)
    assert entry.rate_pair.r1 == pytest.approx(0.5, abs=1e-8)
    assert entry.rate_pair.r2 == pytest.approx(1.0, abs=1e-8)


def test_optimize_weighted_mu_zero_is_best_r1():
    ch = make_channel(a=0.5, b=0.8)
    entry = optimize_weighted(ch, 0.0, 3)
    best = best_grid_value(ch, user_rate_objective(1.0, 0.0), 3)
    assert entry.objective_value == pytest.approx(best, abs=1e-8)
    assert entry.rate_pair.r1 == pytest.approx(best, abs=1e-8)


def test_optimize_weighted_infinite_mu_maximizes_r2():
    ch = make_channel(a=0.5, b=0.8)
    entry = optimize_weighted(ch, math.inf, 3)
    assert entry.mu == math.inf
    assert entry.objective_value == pytest.approx(entry.rate_pair.r2)
    best = best_grid_value(ch, user_rate_objective(0.0, 1.0), 3)
    assert entry.rate_pair.r2 == pytest.approx(best, abs=1e-8)


def test_optimize_weighted_symmetric_channel():
    ch = make_channel(p1=4.0, p2=4.0, a=0.5, b=0.5)
    entry = optimize_weighted(ch, 1.0, 5)
    objective = user_rate_objective(1.0, 1.0)
    mirrored = PowerSplit.from_fractions(ch, entry.lam2, entry.lam1)
    mirrored_value = maximize_value(build_instance(ch, mirrored).polytope, objective)
    assert mirrored_value == pytest.approx(entry.objective_value, abs=1e-8)
    assert optimize_weighted(ch.swapped(), 1.0, 5).objective_value == pytest.approx(entry.objective_value, abs=1e-8)


def test_optimize_weighted_point_attains_value():
    ch = make_channel(p1=5.0, p2=2.0, a=0.7, b=0.3)
    entry = optimize_weighted(ch, 2.0, 3)
    inst = build_instance(ch, entry.best_split)
    value, point = maximize(inst.polytope, user_rate_objective(1.0, 2.0))
    assert entry.objective_value == pytest.approx(value, abs=1e-8)
    assert inst.polytope.contains(point)


def test_trace_boundary_sorted_and_monotone():
    ch = make_channel(a=0.4, b=0.4)
    trace = trace_boundary(ch, [2.0, 0.0, math.inf, 0.5, 1.0], 3)
    mus = [e.mu for e in trace.entries]
    assert mus == [0.0, 0.5, 1.0, 2.0, math.inf]
    r2 = [e.rate_pair.r2 for e in trace.entries]
    assert all(b >= a - 1e-7 for a, b in zip(r2, r2[1:]))


def test_trace_boundary_empty_mu_list():
    with pytest.raises(DomainError, match="empty"):
        trace_boundary(make_channel(), [], 3)


def test_default_mu_sweep():
    mus = default_mu_sweep()
    assert len(mus) == 43
    assert mus[0] == 0.0
    assert mus[1] == pytest.approx(2.0**-5)
    assert mus[-2] == pytest.approx(2.0**5)
    assert math.isinf(mus[-1])


def test_default_mu_sweep_from_settings(monkeypatch):
    monkeypatch.setenv("HKGIC_MU_SWEEP_COUNT", "3")
    monkeypatch.setenv("HKGIC_MU_SWEEP_MIN_EXP", "-1")
    monkeypatch.setenv("HKGIC_MU_SWEEP_MAX_EXP", "1")
    assert default_mu_sweep() == pytest.approx([0.0, 0.5, 1.0, 2.0, math.inf])


def test_region_union_interference_free():
    ch = make_channel(p1=1.0, p2=1.0, a=0.0, b=0.0)
    hull = region_union(ch, 3)
    np.testing.assert_allclose(hull.points, [(0, 0), (0.5, 0), (0.5, 0.5), (0, 0.5)], atol=1e-12)


def test_region_union_grid_monotone():
    ch = make_channel(p1=2.0, p2=3.0, a=0.6, b=0.4)
    assert_region_inside(region_union(ch, 2), region_union(ch, 3))


def test_containment_chain_small_grid():
    ch = make_channel(p1=6.0, p2=6.0, a=0.25, b=0.25)
    coarse = region_union(ch, 3)
    fine = region_sweep(ch, 5)
    assert_region_inside(coarse, fine.hull)
    assert_region_inside(fine.hull, no_interference_rectangle(ch))
    assert len(fine.regions) == 25
    assert fine.points[6] == (0.25, 0.25)


def test_region_sweep_raw_union():
    ch = make_channel(a=0.3, b=0.3)
    sweep = region_sweep(ch, 2)
    assert sweep.hull.coords == R_COORDS
    for region in sweep.regions:
        for v in region.vertices:
            assert sweep.raw_contains(v)
            assert sweep.hull.contains(v)
    x0, y0, x1, y1 = sweep.hull.bounding_box()
    assert not sweep.raw_contains((x1 + 0.1, y1 + 0.1))


def test_region_sweep_parallel_matches_serial():
    ch = make_channel(a=0.3, b=0.5)
    serial = region_sweep(ch, 2, workers=1)
    parallel = region_sweep(ch, 2, workers=2)
    assert parallel == serial


def test_balanced_point_on_symmetric_split():
    inst = make_instance(0.5, 0.5, p1=4.0, p2=4.0, a=0.5, b=0.5)
    objective = user_rate_objective(1.0, 1.0)
    value, x = balanced_point(inst, objective)
    assert value == pytest.approx(maximize_value(inst.polytope, objective))
    assert inst.polytope.contains(x, 1e-8)
    pair = RateTuple4.from_point(x).rate_pair()
    assert pair.r1 == pytest.approx(pair.r2, abs=1e-6)
    assert pair.r1 + pair.r2 == pytest.approx(value, abs=1e-8)


def test_optimize_weighted_symmetric_reports_balanced_point():
    ch = make_channel(p1=4.0, p2=4.0, a=0.5, b=0.5)
    entry = optimize_weighted(ch, 1.0, 3)
    assert entry.objective_value == pytest.approx(best_grid_value(ch, user_rate_objective(1.0, 1.0), 3), abs=1e-8)
    if entry.lam1 == entry.lam2:
        assert entry.rate_pair.r1 == pytest.approx(entry.rate_pair.r2, abs=1e-6)


@pytest.mark.parametrize("mu", MU_VALUES + (math.inf,))
def test_boundary_objective_grows_with_nested_grid(mu):
    ch = make_channel(p1=5.0, p2=2.0, a=0.7, b=0.3)
    coarse = optimize_weighted(ch, mu, 3)
    fine = optimize_weighted(ch, mu, 5)
    assert coarse.objective_value <= fine.objective_value + 1e-8
