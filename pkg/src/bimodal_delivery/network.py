"""Bi-modal delivery network: road digraph, aerial star, demand and flows.

Nodes and edges are identified by dense integers assigned at construction;
human-readable node names are kept alongside for reporting. Parcels,
trucks and drones are treated as continuous hourly flows.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import OverDeliveryError
from .latency import LatencyPlane

#: Slack allowed when trucks meet a node's demand, relative to max(demand, 1).
DELIVERY_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RoadEdge:
    id: int
    tail: int
    head: int
    length_km: float
    lanes: int
    nominal_flow: float
    plane: LatencyPlane


@dataclass(frozen=True)
class AerialEdge:
    id: int
    tail: int
    head: int
    latency: float


@dataclass(frozen=True)
class Constants:
    parcels_per_truck: float = 125
    truck_cost: float = 30.0
    drone_cost: float = 0.5
    beta: float = 14_000.0
    cost_cap: float = 1e12
    drone_speed: float = 25.0


@dataclass(frozen=True)
class Violation:
    code: str
    element: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.element}: {self.message}"


def _frozen(values, n):
    arr = np.zeros(n) if values is None else np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable network description.

    ``demand`` is indexed by node id (parcels/hour). ``coords`` optionally
    holds planar node positions in km, used for automatic drone latencies.
    """

    names: tuple[str, ...]
    hub: int
    road_edges: tuple[RoadEdge, ...]
    aerial_edges: tuple[AerialEdge, ...]
    demand: np.ndarray
    constants: Constants = field(default_factory=Constants)
    coords: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "road_edges", tuple(self.road_edges))
        object.__setattr__(self, "aerial_edges", tuple(self.aerial_edges))
        object.__setattr__(self, "demand", _frozen(self.demand, len(self.names)))
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float).reshape(len(self.names), 2)
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def n_nodes(self):
        return len(self.names)

    @property
    def n_edges(self):
        return len(self.road_edges)

    @property
    def total_demand(self):
        return float(self.demand.sum())

    def node_id(self, name: str) -> int:
        return self.names.index(name)

    def nominal_flows(self) -> np.ndarray:
        return np.array([e.nominal_flow for e in self.road_edges], dtype=float)

    def omega(self) -> np.ndarray:
        """(E, 3) array of latency-plane weights."""
        if not self.road_edges:
            return np.zeros((0, 3))
        return np.array([e.plane.omega for e in self.road_edges], dtype=float)

    def aerial_latency_by_node(self) -> np.ndarray:
        """Drone latency per destination node; NaN where no aerial edge exists."""
        out = np.full(self.n_nodes, np.nan)
        for e in self.aerial_edges:
            out[e.head] = e.latency
        return out

    def out_edges(self) -> list[list[RoadEdge]]:
        adj = [[] for _ in range(self.n_nodes)]
        for e in self.road_edges:
            adj[e.tail].append(e)
        return adj

    def reachable_from_hub(self) -> set[int]:
        adj = self.out_edges()
        seen = {self.hub}
        queue = deque([self.hub])
        while queue:
            v = queue.popleft()
            for e in adj[v]:
                if e.head not in seen:
                    seen.add(e.head)
                    queue.append(e.head)
        return seen


def validate(network: Network) -> list[Violation]:
    """List every broken structural invariant; empty means valid."""
    out = []
    n = network.n_nodes
    node_ok = lambda v: isinstance(v, (int, np.integer)) and 0 <= v < n  # noqa: E731

    if not node_ok(network.hub):
        return [Violation("hub", str(network.hub), "hub is not a node of the network")]
    if len(set(network.names)) != n:
        out.append(Violation("duplicate-node", "nodes", "node names are not unique"))

    c = network.constants
    for attr in ("parcels_per_truck", "beta", "cost_cap", "drone_speed"):
        if not getattr(c, attr) > 0:
            out.append(Violation("constants", attr, f"must be > 0, got {getattr(c, attr)}"))
    for attr in ("truck_cost", "drone_cost"):
        if not getattr(c, attr) >= 0:
            out.append(Violation("constants", attr, f"must be >= 0, got {getattr(c, attr)}"))

    for e in network.road_edges:
        tag = f"road edge {e.id}"
        if not (node_ok(e.tail) and node_ok(e.head)):
            out.append(Violation("unknown-node", tag, f"endpoints ({e.tail}, {e.head}) out of range"))
            continue
        if e.tail == e.head:
            out.append(Violation("self-loop", tag, f"connects node {e.tail} to itself"))
        if not e.length_km > 0:
            out.append(Violation("edge-length", tag, f"length must be > 0 km, got {e.length_km}"))
        if e.lanes not in (2, 3):
            out.append(Violation("lanes", tag, f"lanes must be 2 or 3, got {e.lanes}"))
        if not (np.isfinite(e.nominal_flow) and e.nominal_flow >= 0):
            out.append(Violation("nominal-flow", tag, f"nominal flow must be finite and >= 0, got {e.nominal_flow}"))

    seen_heads = set()
    for e in network.aerial_edges:
        tag = f"aerial edge {e.id}"
        if e.tail != network.hub:
            out.append(Violation("aerial-origin", tag, f"departs node {e.tail}, not hub {network.hub}"))
        if not node_ok(e.head) or e.head == network.hub:
            out.append(Violation("aerial-destination", tag, f"invalid destination {e.head}"))
            continue
        if e.head in seen_heads:
            out.append(Violation("aerial-duplicate", tag, f"second aerial edge to node {e.head}"))
        seen_heads.add(e.head)
        if not (np.isfinite(e.latency) and e.latency > 0):
            out.append(Violation("aerial-latency", tag, f"latency must be > 0 h, got {e.latency}"))

    demand = network.demand
    if demand.shape != (n,):
        out.append(Violation("demand", "demand", f"expected {n} entries, got shape {demand.shape}"))
        return out
    if demand[network.hub] != 0:
        out.append(Violation("hub-demand", network.names[network.hub], f"hub demand must be 0, got {demand[network.hub]}"))
    for v in np.flatnonzero(~(demand >= 0)):
        out.append(Violation("negative-demand", network.names[v], f"demand must be >= 0, got {demand[v]}"))

    if network.road_edges and n > 1 and not _weakly_connected(network):
        out.append(Violation("road-disconnected", "road graph", "road graph is not connected"))
    reach = network.reachable_from_hub()
    for v in range(n):
        if v != network.hub and demand[v] > 0 and v not in reach:
            out.append(Violation("road-unreachable", network.names[v], "demanded node is unreachable by road from the hub"))
    return out


def _weakly_connected(network: Network) -> bool:
    adj = [set() for _ in range(network.n_nodes)]
    for e in network.road_edges:
        adj[e.tail].add(e.head)
        adj[e.head].add(e.tail)
    touched = {v for v in range(network.n_nodes) if adj[v]} | {network.hub}
    seen = {network.hub}
    stack = [network.hub]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return touched <= seen


@dataclass(frozen=True, eq=False)
class FlowAssignment:
    """Truck path flows and every quantity derived from them."""

    path_flow: np.ndarray  # trucks/h per road path
    edge_flow: np.ndarray  # trucks/h per road edge
    truck_demand: np.ndarray  # parcels/h delivered by truck, per node
    drone_demand: np.ndarray  # parcels/h delivered by drone, per node
    drone_flow: np.ndarray  # drones/h per aerial edge, in network.aerial_edges order


def derive_flows(network: Network, paths, path_flow: Sequence[float]) -> FlowAssignment:
    """Aggregate path flows to edges and split each node's demand by mode.

    ``paths`` is a `PathSet` (or any sequence of objects with ``edges`` and
    ``destination``). Drone demand is the demand left over after trucks.
    """
    path_list = getattr(paths, "paths", paths)
    f = np.asarray(path_flow, dtype=float)
    if f.shape != (len(path_list),):
        raise ValueError(f"expected {len(path_list)} path flows, got shape {f.shape}")
    if np.any(f < 0):
        raise ValueError("path flows must be >= 0")

    m = network.constants.parcels_per_truck
    edge_flow = np.zeros(network.n_edges)
    arriving = np.zeros(network.n_nodes)
    for p, fp in zip(path_list, f):
        for e in p.edges:
            edge_flow[e] += fp
        arriving[p.destination] += fp

    truck_demand = m * arriving
    drone_demand = network.demand - truck_demand
    tol = DELIVERY_TOLERANCE * np.maximum(network.demand, 1.0)
    for v in np.flatnonzero(drone_demand < -tol):
        raise OverDeliveryError(network.names[v], -drone_demand[v])
    # clamp round-off inside the tolerance band
    over = drone_demand < 0
    truck_demand[over] = network.demand[over]
    drone_demand[over] = 0.0

    drone_flow = np.array([drone_demand[e.head] for e in network.aerial_edges], dtype=float)
    return FlowAssignment(f.copy(), edge_flow, truck_demand, drone_demand, drone_flow)


def operational_cost(assignment: FlowAssignment, constants: Constants) -> float:
    """Hourly fleet cost in dollars: trucks per m parcels plus one drone per parcel."""
    c = constants
    return float(c.truck_cost / c.parcels_per_truck * assignment.truck_demand.sum()
                 + c.drone_cost * assignment.drone_demand.sum())
