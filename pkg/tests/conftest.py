import numpy as np
import pytest

from bimodal_delivery.latency import LatencyPlane
from bimodal_delivery.network import AerialEdge, Constants, Network, RoadEdge
from bimodal_delivery.paths import enumerate_paths
from bimodal_delivery.pipeline import sweep
from bimodal_delivery.scenario_io import example_network, sioux_falls

# acceptance criteria report lines, printed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_plane(rng):
    return LatencyPlane((rng.uniform(0.005, 0.05), rng.uniform(1e-5, 1e-3), rng.uniform(1e-6, 1e-4)))


def random_network(rng, n_nodes=None, edge_prob=0.5, cost_cap=None, aerial=True):
    """Random connected network, hub 0, every non-hub node demanded.

    A random arborescence from the hub guarantees road reachability; extra
    directed edges are added with probability ``edge_prob``.
    """
    n = n_nodes or int(rng.integers(2, 7))
    pairs = set()
    for v in range(1, n):
        pairs.add((int(rng.integers(0, v)), v))
    for u in range(n):
        for v in range(1, n):
            if u != v and rng.random() < edge_prob:
                pairs.add((u, v))
    road = []
    for i, (u, v) in enumerate(sorted(pairs)):
        lanes = int(rng.choice([2, 3]))
        road.append(RoadEdge(i, u, v, float(rng.uniform(0.3, 3.0)), lanes,
                             float(rng.uniform(0, 3000)), random_plane(rng)))
    aerial_edges = []
    if aerial:
        aerial_edges = [AerialEdge(i, 0, v, float(rng.uniform(0.02, 0.5))) for i, v in enumerate(range(1, n))]
    demand = np.concatenate([[0.0], rng.uniform(50, 2000, n - 1)])
    m = float(rng.choice([10, 50, 125]))
    c_truck, c_drone = float(rng.uniform(5, 60)), float(rng.uniform(0.1, 2.0))
    if cost_cap is None:
        # between the cheaper and the dearer pure-mode fleet, sometimes binding
        total = demand.sum()
        lo, hi = sorted([c_truck * total / m, c_drone * total])
        cost_cap = float(rng.uniform(lo, hi)) + 1e-3 * hi
    constants = Constants(m, c_truck, c_drone, float(rng.uniform(1000, 20000)), cost_cap, 25.0)
    names = [f"n{i}" for i in range(n)]
    return Network(names, 0, road, aerial_edges, demand, constants)


def small_network(rng, max_paths=3):
    """Random network with a hub and two destinations and at most ``max_paths`` paths."""
    while True:
        net = random_network(rng, n_nodes=3, edge_prob=0.4)
        paths = enumerate_paths(net, 8)
        if len(paths) <= max_paths:
            return net, paths


def random_feasible_flow(rng, network, paths):
    """Random path flows that never over-deliver (ignores the cost cap)."""
    f = rng.uniform(0, 1, len(paths))
    m = network.constants.parcels_per_truck
    for v, ids in paths.by_destination.items():
        share = rng.uniform(0, 1)
        f[ids] *= share * network.demand[v] / (m * f[ids].sum())
    return f


@pytest.fixture(scope="session")
def example():
    sc = example_network()
    return sc.network, enumerate_paths(sc.network, sc.max_edges)


@pytest.fixture(scope="session")
def sioux():
    sc = sioux_falls()
    return sc.network, enumerate_paths(sc.network, sc.max_edges)


@pytest.fixture(scope="session")
def example_cells(example):
    return sweep(*example, gammas=[0.0, 0.5, 1.0])


@pytest.fixture(scope="session")
def sioux_cells(sioux):
    return sweep(*sioux, gammas=[0.0, 0.5, 1.0], jobs=3)
