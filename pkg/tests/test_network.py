import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bimodal_delivery.errors import OverDeliveryError
from bimodal_delivery.latency import LatencyPlane
from bimodal_delivery.network import (
    AerialEdge,
    Constants,
    Network,
    RoadEdge,
    derive_flows,
    operational_cost,
    validate,
)
from bimodal_delivery.paths import enumerate_paths

from conftest import random_feasible_flow, random_network

PLANE = LatencyPlane((0.01, 0.002, 0.001))


def line_network(demand=(0.0, 0.0, 100.0), aerial=True):
    """hub -> u -> v with optional drone edges to both."""
    road = [RoadEdge(0, 0, 1, 1.0, 2, 100.0, PLANE), RoadEdge(1, 1, 2, 1.0, 2, 100.0, PLANE)]
    air = [AerialEdge(0, 0, 1, 0.3), AerialEdge(1, 0, 2, 0.3)] if aerial else []
    return Network(["hub", "u", "v"], 0, road, air, np.array(demand), Constants(parcels_per_truck=125))


def test_empty_network_is_valid():
    assert validate(Network(["hub"], 0, [], [], [0.0])) == []


def test_aerial_origin_violation():
    net = line_network()
    bad = Network(net.names, 0, net.road_edges, [AerialEdge(0, 1, 2, 0.3)], net.demand, net.constants)
    codes = [v.code for v in validate(bad)]
    assert codes == ["aerial-origin"]


@pytest.mark.parametrize("mutate, code", [
    (lambda n: dict(demand=[5.0, 0.0, 100.0]), "hub-demand"),
    (lambda n: dict(demand=[0.0, -1.0, 100.0]), "negative-demand"),
    (lambda n: dict(road_edges=[RoadEdge(0, 0, 0, 1.0, 2, 1.0, PLANE)]), "self-loop"),
    (lambda n: dict(road_edges=n.road_edges + (RoadEdge(2, 0, 2, 1.0, 4, 1.0, PLANE),)), "lanes"),
    (lambda n: dict(aerial_edges=n.aerial_edges + (AerialEdge(2, 0, 2, 0.1),)), "aerial-duplicate"),
    (lambda n: dict(road_edges=n.road_edges[:1]), "road-unreachable"),
])
def test_violations_name_the_invariant(mutate, code):
    net = line_network()
    fields = dict(names=net.names, hub=0, road_edges=net.road_edges, aerial_edges=net.aerial_edges,
                  demand=net.demand, constants=net.constants)
    fields.update(mutate(net))
    assert code in [v.code for v in validate(Network(**fields))]


def test_network_arrays_are_read_only():
    net = line_network()
    with pytest.raises(ValueError):
        net.demand[1] = 3.0


def test_zero_flow_sends_everything_by_drone():
    net = line_network(demand=(0.0, 40.0, 100.0))
    paths = enumerate_paths(net, 8)
    a = derive_flows(net, paths, np.zeros(len(paths)))
    assert np.all(a.truck_demand == 0)
    np.testing.assert_array_equal(a.drone_demand, net.demand)
    np.testing.assert_array_equal(a.drone_flow, [40.0, 100.0])


def test_single_path_truck_demand():
    net = Network(["hub", "v"], 0, [RoadEdge(0, 0, 1, 1.0, 2, 0.0, PLANE)], [AerialEdge(0, 0, 1, 0.3)],
                  [0.0, 100.0], Constants(parcels_per_truck=125))
    a = derive_flows(net, enumerate_paths(net, 8), [0.4])
    assert a.truck_demand[1] == pytest.approx(50.0)
    assert a.drone_demand[1] == pytest.approx(50.0)


def test_pass_through_node_receives_nothing():
    net = line_network()
    paths = enumerate_paths(net, 8)
    through = [p.id for p in paths if p.destination == 2]
    f = np.zeros(len(paths))
    f[through] = 0.5
    a = derive_flows(net, paths, f)
    assert a.truck_demand[1] == 0.0
    np.testing.assert_allclose(a.edge_flow, [0.5, 0.5])


def test_over_delivery_names_node():
    net = line_network()
    paths = enumerate_paths(net, 8)
    with pytest.raises(OverDeliveryError, match="over-delivery at node u"):
        derive_flows(net, paths, [1.0, 0.0])


def test_over_delivery_tolerance_clamps_roundoff():
    net = line_network()
    paths = enumerate_paths(net, 8)
    a = derive_flows(net, paths, [0.0, 100.0 / 125 * (1 + 1e-12)])
    assert a.drone_demand[2] == 0.0 and a.truck_demand[2] == 100.0


def test_operational_cost_examples():
    zero = derive_flows(Network(["hub"], 0, [], [], [0.0]), [], [])
    assert operational_cost(zero, Constants()) == 0.0
    net = Network(["hub", "v1", "v2"], 0,
                  [RoadEdge(0, 0, 1, 1.0, 2, 0.0, PLANE), RoadEdge(1, 0, 2, 1.0, 2, 0.0, PLANE)],
                  [AerialEdge(0, 0, 1, 0.1), AerialEdge(1, 0, 2, 0.1)], [0.0, 125.0, 50.0],
                  Constants(parcels_per_truck=125, truck_cost=30, drone_cost=0.5))
    a = derive_flows(net, enumerate_paths(net, 8), [1.0, 0.0])
    assert operational_cost(a, net.constants) == pytest.approx(55.0)


def eq2_truck_demand(network, assignment):
    """Parcels dropped = m * (truck inflow - truck outflow) at each node."""
    inflow = np.zeros(network.n_nodes)
    outflow = np.zeros(network.n_nodes)
    for e, x in zip(network.road_edges, assignment.edge_flow):
        inflow[e.head] += x
        outflow[e.tail] += x
    out = network.constants.parcels_per_truck * (inflow - outflow)
    out[network.hub] = 0.0
    return out


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_derived_flow_invariants(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    paths = enumerate_paths(net, 8)
    f = random_feasible_flow(rng, net, paths)
    a = derive_flows(net, paths, f)
    # demand split sums back to the total
    assert (a.truck_demand + a.drone_demand).sum() == pytest.approx(net.total_demand, rel=1e-12)
    assert np.all(a.truck_demand >= 0) and np.all(a.drone_demand >= 0)
    # flow conservation form of the truck deliveries
    np.testing.assert_allclose(a.truck_demand, eq2_truck_demand(net, a), atol=1e-9 * net.demand.max())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 1), st.floats(0, 1))
def test_edge_flow_linear(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    paths = enumerate_paths(net, 8)
    x = random_feasible_flow(rng, net, paths) / 2
    y = random_feasible_flow(rng, net, paths) / 2
    combo = derive_flows(net, paths, alpha * x + beta * y).edge_flow
    np.testing.assert_allclose(combo, alpha * derive_flows(net, paths, x).edge_flow
                               + beta * derive_flows(net, paths, y).edge_flow, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_cost_affine_in_terminal_flow(seed):
    rng = np.random.default_rng(seed)
    net = random_network(rng)
    paths = enumerate_paths(net, 8)
    f = random_feasible_flow(rng, net, paths)
    c = net.constants
    expected = c.drone_cost * net.total_demand + (c.truck_cost - c.parcels_per_truck * c.drone_cost) * f.sum()
    got = operational_cost(derive_flows(net, paths, f), c)
    assert got == pytest.approx(expected, rel=1e-10, abs=1e-9)
