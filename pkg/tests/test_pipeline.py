from dataclasses import replace

import numpy as np
from hypothesis import given, settings, strategies as st

from bimodal_delivery.network import Network
from bimodal_delivery.paths import enumerate_paths
from bimodal_delivery.pipeline import MINUTES_PER_HOUR, run_cell, sweep
from bimodal_delivery.qp import INFEASIBLE, OPTIMAL

from conftest import random_network

SLACK = 2e-6


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1_000_000))
def test_drones_never_hurt(seed):
    rng = np.random.default_rng(seed)
    # generous cap so the truck-only fleet is affordable
    net = random_network(rng, cost_cap=1e12)
    paths = enumerate_paths(net, 8)
    for gamma in (0.0, 0.5, 1.0):
        both = run_cell(net, paths, gamma, "bimodal")
        trucks = run_cell(net, paths, gamma, "truck_only")
        assert both.status == OPTIMAL
        if trucks.status == OPTIMAL:
            assert both.solution.objective <= trucks.solution.objective + SLACK


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1_000_000))
def test_tradeoff_monotone_in_gamma(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    paths = enumerate_paths(net, 8)
    cells = sweep(net, paths, np.linspace(0, 1, 6), modes=["bimodal"])
    assert all(c.status == OPTIMAL for c in cells)
    L = [c.metrics.parcel_latency for c in cells]
    LS = [c.metrics.societal_latency for c in cells]
    assert np.all(np.diff(L) <= SLACK)
    assert np.all(np.diff(LS) >= -SLACK)


def test_cell_objective_matches_metrics(example_cells):
    for c in example_cells:
        assert abs(c.solution.objective - c.metrics.objective) <= 1e-9 * abs(c.metrics.objective)
        r = c.row()
        assert r.parcel_latency_minutes == c.metrics.parcel_latency * MINUTES_PER_HOUR


def test_sweep_order_independent_of_jobs(example):
    one = [c.row() for c in sweep(*example, gammas=[1.0, 0.0], jobs=1)]
    many = [c.row() for c in sweep(*example, gammas=[1.0, 0.0], jobs=4)]
    assert one == many
    assert [(r.gamma, r.mode) for r in one] == [(1.0, "bimodal"), (1.0, "truck_only"),
                                                (0.0, "bimodal"), (0.0, "truck_only")]


def test_failed_cell_recorded_not_raised(example):
    net, paths = example
    short = enumerate_paths(net, 1)
    # v3 cannot be reached within one edge, so trucks alone cannot serve it
    cell = run_cell(net, short, 0.5, "truck_only")
    assert cell.status == INFEASIBLE and "v3" in cell.error
    assert np.isnan(cell.row().parcel_latency_minutes)


def test_cost_cap_below_cheapest_fleet(example):
    net, paths = example
    c = net.constants
    # trucks are the cheaper mode here, so the all-truck fleet is the floor
    floor = c.truck_cost * net.total_demand / c.parcels_per_truck
    for cap, expected in ((0.9 * floor, INFEASIBLE), (1.01 * floor, OPTIMAL)):
        capped = Network(net.names, net.hub, net.road_edges, net.aerial_edges, net.demand,
                         replace(c, cost_cap=cap), net.coords)
        assert run_cell(capped, paths, 0.5, "truck_only").status == expected
        assert run_cell(capped, paths, 0.5, "bimodal").status == expected
