import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from firewatch.model import PhysicalParams
from firewatch.routing import (
    build_route,
    nearest_neighbor_tour,
    route_energy,
    tour_length,
    two_opt,
)
from testutil import brute_force_tour_optimum, build_scenario


def test_tour_length_square():
    xy = np.array([[10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    assert tour_length((0.0, 0.0), xy) == pytest.approx(40.0)
    assert tour_length((0.0, 0.0), np.empty((0, 2))) == 0.0


def test_nn_empty_and_collinear():
    assert nearest_neighbor_tour((0.0, 0.0), np.empty((0, 2))) == []
    xy = np.array([[2.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert nearest_neighbor_tour((0.0, 0.0), xy) == [1, 0, 2]


def test_nn_prefers_euclidean_not_axis():
    xy = np.array([[1.0, 0.0], [0.9, 5.0]])
    assert nearest_neighbor_tour((0.0, 0.0), xy) == [0, 1]


def test_nn_tie_prefers_lowest_index():
    xy = np.array([[10.0, 0.0], [-10.0, 0.0], [0.0, 30.0]])
    order = nearest_neighbor_tour((0.0, 0.0), xy)
    assert order[0] == 0


def test_two_opt_uncrosses_square():
    # crossing tour (0,0)->(10,10)->(10,0)->(0,10): 48.28 -> perimeter 40
    xy = np.array([[10.0, 10.0], [10.0, 0.0], [0.0, 10.0]])
    crossing = [0, 1, 2]
    before = tour_length((0.0, 0.0), xy[crossing])
    assert before == pytest.approx(20.0 + 2.0 * math.hypot(10, 10), abs=1e-9)
    after = two_opt((0.0, 0.0), xy, crossing)
    assert tour_length((0.0, 0.0), xy[after]) == pytest.approx(40.0, abs=1e-9)
    assert sorted(after) == [0, 1, 2]


def test_two_opt_leaves_convex_tour_alone():
    # perimeter order of a convex polygon admits no improving swap
    xy = np.array([[10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    assert two_opt((0.0, 0.0), xy, [0, 1, 2]) == [0, 1, 2]


def test_two_opt_never_lengthens_and_is_idempotent():
    rng = np.random.default_rng(8)
    for _ in range(20):
        n = int(rng.integers(2, 10))
        xy = rng.uniform(0, 1000, size=(n, 2))
        depot = tuple(rng.uniform(0, 1000, size=2))
        nn = nearest_neighbor_tour(depot, xy)
        once = two_opt(depot, xy, nn)
        assert tour_length(depot, xy[once]) <= tour_length(depot, xy[nn]) + 1e-9
        assert two_opt(depot, xy, once) == once


def test_two_opt_brute_force_oracle():
    rng = np.random.default_rng(21)
    for _ in range(30):
        n = int(rng.integers(3, 8))
        xy = rng.uniform(0, 1000, size=(n, 2))
        depot = tuple(rng.uniform(0, 1000, size=2))
        nn = nearest_neighbor_tour(depot, xy)
        improved = two_opt(depot, xy, nn)
        opt = brute_force_tour_optimum(depot, xy)
        got = tour_length(depot, xy[improved])
        assert opt - 1e-6 <= got <= tour_length(depot, xy[nn]) + 1e-9


def test_route_energy_examples():
    p = PhysicalParams()
    assert route_energy(27000.0, [], p) == pytest.approx(50.0)
    comm_only = route_energy(0.0, [4.0] * 10, p)
    assert comm_only == pytest.approx(5.0 * (320.0 / 10.0) / 3600.0)  # 0.0444 Wh
    assert route_energy(0.0, [], p) == 0.0
    with pytest.raises(ValueError):
        route_energy(-1.0, [], p)


@given(st.floats(0, 1e6), st.floats(0, 1e6),
       st.lists(st.floats(0.1, 10), max_size=8))
def test_route_energy_monotone(l1, l2, alphas):
    p = PhysicalParams()
    lo, hi = sorted([l1, l2])
    assert route_energy(lo, alphas, p) <= route_energy(hi, alphas, p) + 1e-12
    assert route_energy(lo, alphas, p) <= route_energy(lo, alphas + [1.0], p)


def test_build_route_fields_consistent():
    sc = build_scenario(
        [(1000.0, 0.0, 0, 2.0, 100.0), (1500.0, 300.0, 0, 3.0, 100.0),
         (2000.0, -200.0, 0, 1.0, 100.0)],
        [(0.0, 0.0, 5000.0)])
    p = sc.physical
    r = build_route(0, 0, (0.0, 0.0), list(sc.sensors), p)
    assert set(r.waypoints) == {0, 1, 2}
    assert r.revisit_s * p.v_g == pytest.approx(r.length_m, rel=1e-12)
    assert r.energy_wh == pytest.approx(route_energy(r.length_m, [2.0, 3.0, 1.0], p))
    # stored length matches re-derived geometry
    xy = np.array([[sc.sensors[i].pos.x, sc.sensors[i].pos.y] for i in r.waypoints])
    assert r.length_m == pytest.approx(tour_length((0.0, 0.0), xy))


def test_build_route_empty_members():
    p = PhysicalParams()
    r = build_route(3, 1, (5.0, 5.0), [], p)
    assert r.waypoints == ()
    assert r.length_m == 0.0 and r.revisit_s == 0.0 and r.energy_wh == 0.0


def test_build_route_two_opt_no_worse_than_nn():
    rng = np.random.default_rng(30)
    xy = rng.uniform(0, 5000, size=(12, 2))
    sc = build_scenario([(x, y, 0, 1.0, 100.0) for x, y in xy],
                        [(2500.0, 2500.0, 5000.0)])
    p = sc.physical
    with_opt = build_route(0, 0, (2500.0, 2500.0), list(sc.sensors), p, use_two_opt=True)
    without = build_route(0, 0, (2500.0, 2500.0), list(sc.sensors), p, use_two_opt=False)
    assert with_opt.length_m <= without.length_m + 1e-9
