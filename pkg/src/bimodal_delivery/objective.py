"""Delivery metrics and assembly of the routing quadratic program.

With truck path flows ``f`` (trucks/h), edge-path incidence ``B``, path
terminal incidence ``T`` and per-edge zero-flow latency ``c = w0 + w2*f0``
and slope ``s = w1 + w2``, the objective

    J(f) = gamma * L(f) + (1 - gamma) * LS(f)

expands to ``f'Qf + a'f + constant`` with

    Q = (gamma*m/D) * B' diag(s) B
    a = (gamma*m/D) * (B'c - T'lA) + ((1-gamma)/beta) * B'(f0*s)
    constant = (gamma/D) * sum_v d_v lA_v + ((1-gamma)/beta) * sum_e f0_e c_e

where D is total demand and lA the drone latency per node.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, InfeasibleError
from .latency import edge_latencies
from .network import FlowAssignment, Network, operational_cost
from .paths import PathSet

MODES = ("bimodal", "truck_only")


@dataclass(frozen=True)
class Metrics:
    parcel_latency: float  # hours
    truck_latency_sum: float  # parcel-hours per hour
    drone_latency_sum: float  # parcel-hours per hour
    societal_latency: float  # hours
    operational_cost: float  # dollars per hour
    objective: float  # hours
    gamma: float


@dataclass(eq=False)
class QPProblem:
    """``min f'Qf + a'f + constant`` s.t. ``G f <= h`` and ``A f = b``."""

    Q: np.ndarray
    a: np.ndarray
    constant: float
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    gamma: Optional[float] = None
    mode: Optional[str] = None
    row_labels: list = field(default_factory=list)

    def __post_init__(self):
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        self.a = np.asarray(self.a, dtype=float).ravel()
        n = self.a.size
        self.G = np.asarray(self.G, dtype=float).reshape(-1, n)
        self.h = np.asarray(self.h, dtype=float).ravel()
        self.A = np.zeros((0, n)) if self.A is None else np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float).ravel()
        self.constant = float(self.constant)
        if self.Q.shape != (n, n):
            raise ValueError(f"Q has shape {self.Q.shape}, expected {(n, n)}")
        if self.G.shape[0] != self.h.size or self.A.shape[0] != self.b.size:
            raise ValueError("constraint matrices and right-hand sides disagree in length")

    @property
    def n(self):
        return self.a.size

    def row(self, label: str) -> int:
        return self.row_labels.index(label)

    def to_json(self) -> str:
        return json.dumps({
            "gamma": self.gamma,
            "mode": self.mode,
            "Q": self.Q.tolist(),
            "a": self.a.tolist(),
            "constant": self.constant,
            "G": self.G.tolist(),
            "h": self.h.tolist(),
            "A": self.A.tolist(),
            "b": self.b.tolist(),
            "row_labels": list(self.row_labels),
        })

    @classmethod
    def from_json(cls, text: str) -> "QPProblem":
        d = json.loads(text)
        n = len(d["a"])
        return cls(
            Q=np.array(d["Q"], dtype=float).reshape(n, n),
            a=d["a"],
            constant=d["constant"],
            G=np.array(d["G"], dtype=float).reshape(-1, n),
            h=d["h"],
            A=np.array(d["A"], dtype=float).reshape(-1, n),
            b=d["b"],
            gamma=d.get("gamma"),
            mode=d.get("mode"),
            row_labels=d.get("row_labels", []),
        )


def evaluate(problem: QPProblem, f) -> float:
    f = np.asarray(f, dtype=float)
    if f.shape != (problem.n,):
        raise ValueError(f"expected a vector of length {problem.n}, got shape {f.shape}")
    return float(f @ problem.Q @ f + problem.a @ f + problem.constant)


def _road_latencies(network: Network, assignment: FlowAssignment) -> np.ndarray:
    return edge_latencies(network.omega(), assignment.edge_flow, network.nominal_flows())


def parcel_latency(network: Network, paths: PathSet, assignment: FlowAssignment) -> tuple[float, float, float]:
    """Average parcel latency and its truck and drone parcel-hour sums."""
    total = network.total_demand
    if total <= 0:
        raise DomainError("parcel latency is undefined when total demand is zero")
    m = network.constants.parcels_per_truck
    ell = _road_latencies(network, assignment)
    truck_sum = 0.0
    for p, fp in zip(paths, assignment.path_flow):
        truck_sum += m * fp * ell[list(p.edges)].sum()

    drone_sum = float(np.dot(assignment.drone_flow, [e.latency for e in network.aerial_edges]))
    served_by_air = {e.head for e in network.aerial_edges}
    for v in np.flatnonzero(assignment.drone_demand > 0):
        if v not in served_by_air:
            raise InfeasibleError(f"node {network.names[v]} needs drone deliveries but has no aerial edge")
    return (truck_sum + drone_sum) / total, float(truck_sum), drone_sum


def societal_latency(network: Network, assignment: FlowAssignment) -> float:
    """Nominal-flow weighted road latency, normalised by beta (hours)."""
    ell = _road_latencies(network, assignment)
    return float(network.nominal_flows() @ ell / network.constants.beta)


def metrics(network: Network, paths: PathSet, assignment: FlowAssignment, gamma: float) -> Metrics:
    L, LR, LA = parcel_latency(network, paths, assignment)
    LS = societal_latency(network, assignment)
    return Metrics(
        parcel_latency=L,
        truck_latency_sum=LR,
        drone_latency_sum=LA,
        societal_latency=LS,
        operational_cost=operational_cost(assignment, network.constants),
        objective=gamma * L + (1.0 - gamma) * LS,
        gamma=gamma,
    )


def assemble_qp(network: Network, paths: PathSet, gamma: float, mode: str = "bimodal") -> QPProblem:
    """Build the quadratic program over truck path flows.

    Inequalities: path flows non-negative, trucks never exceed a node's
    demand (drone share stays non-negative), operational cost below the cap.
    Equalities pin truck deliveries to demand in truck-only mode, for nodes
    with no aerial edge, and to zero for nodes without demand.
    """
    if not 0.0 <= gamma <= 1.0:
        raise DomainError(f"gamma must lie in [0, 1], got {gamma}")
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    total = network.total_demand
    if total <= 0:
        raise DomainError("total demand must be positive")

    c = network.constants
    m = c.parcels_per_truck
    n_paths = len(paths)
    B = paths.edge_incidence(network.n_edges)
    T = paths.terminal_incidence(network.n_nodes)
    omega = network.omega()
    f0 = network.nominal_flows()
    zero_flow_latency = omega[:, 0] + omega[:, 2] * f0
    slope = omega[:, 1] + omega[:, 2]
    drone_latency = network.aerial_latency_by_node()
    has_drone = ~np.isnan(drone_latency)
    drone_latency = np.where(has_drone, drone_latency, 0.0)

    w_parcel = gamma * m / total
    w_society = (1.0 - gamma) / c.beta
    Q = w_parcel * (B.T * slope) @ B
    Q = 0.5 * (Q + Q.T)
    a = w_parcel * (B.T @ zero_flow_latency - T.T @ drone_latency) + w_society * (B.T @ (f0 * slope))
    constant = gamma * float(network.demand @ drone_latency) / total + w_society * float(f0 @ zero_flow_latency)

    G_rows, h_vals, labels = [], [], []
    A_rows, b_vals = [], []
    for i in range(n_paths):
        row = np.zeros(n_paths)
        row[i] = -1.0
        G_rows.append(row)
        h_vals.append(0.0)
        labels.append(f"nonneg:{i}")

    reachable = set(paths.by_destination)
    for v in range(network.n_nodes):
        if v == network.hub:
            continue
        d = network.demand[v]
        if v not in reachable:
            if d > 0 and (mode == "truck_only" or not has_drone[v]):
                raise InfeasibleError(
                    f"node {network.names[v]} has demand {d} but no truck path within "
                    f"{paths.max_edges} edges" + ("" if mode == "truck_only" else " and no aerial edge")
                )
            continue
        if d <= 0:
            A_rows.append(T[v])
            b_vals.append(0.0)
        elif mode == "truck_only" or not has_drone[v]:
            A_rows.append(m * T[v])
            b_vals.append(d)
        else:
            G_rows.append(m * T[v])
            h_vals.append(d)
            labels.append(f"drone:{v}")

    # C(f) = c_D * D + (c_T - m c_D) * sum(T f)
    G_rows.append((c.truck_cost - m * c.drone_cost) * T.sum(axis=0))
    h_vals.append(c.cost_cap - c.drone_cost * total)
    labels.append("cost-cap")

    return QPProblem(
        Q=Q,
        a=a,
        constant=constant,
        G=np.array(G_rows).reshape(-1, n_paths),
        h=np.array(h_vals),
        A=np.array(A_rows).reshape(-1, n_paths) if A_rows else None,
        b=np.array(b_vals) if b_vals else None,
        gamma=gamma,
        mode=mode,
        row_labels=labels,
    )
