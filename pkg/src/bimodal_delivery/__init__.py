"""Congestion-aware routing for truck + drone parcel delivery.

Typical flow: load a scenario, enumerate candidate truck paths, assemble the
quadratic program for a trade-off weight ``gamma`` and solve it::

    from bimodal_delivery import example_network, enumerate_paths, assemble_qp, solve
    sc = example_network()
    paths = enumerate_paths(sc.network, sc.max_edges)
    sol = solve(assemble_qp(sc.network, paths, gamma=0.5))
"""
from .errors import (
    BimodalError,
    DegenerateSamplesError,
    DomainError,
    InfeasibleError,
    NonPhysicalPlaneError,
    OverDeliveryError,
    PathLimitError,
    ScenarioError,
)
from .latency import (
    LatencyPlane,
    LatencySample,
    aerial_latency,
    edge_latency,
    fit_plane,
    reference_plane,
    scale_plane,
)
from .network import (
    AerialEdge,
    Constants,
    FlowAssignment,
    Network,
    RoadEdge,
    Violation,
    derive_flows,
    operational_cost,
    validate,
)
from .objective import Metrics, QPProblem, assemble_qp, evaluate, metrics, parcel_latency, societal_latency
from .paths import Path, PathSet, aerial_paths, enumerate_paths
from .pipeline import run_cell, sweep
from .qp import KKTResiduals, Solution, SolverConfig, check_kkt, grid_oracle, solve
from .scenario_io import (
    ResultRow,
    Scenario,
    TntpOptions,
    example_network,
    export_results,
    import_tntp,
    load_scenario,
    read_results,
    save_scenario,
    sioux_falls,
)

__version__ = "0.1.0"
