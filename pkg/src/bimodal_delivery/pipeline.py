"""Solve one (gamma, mode) cell or a whole sweep of them."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BimodalError
from .network import FlowAssignment, Network, derive_flows
from .objective import MODES, Metrics, QPProblem, assemble_qp, metrics
from .paths import PathSet
from .qp import INFEASIBLE, Solution, SolverConfig, solve
from .scenario_io import ResultRow

MINUTES_PER_HOUR = 60.0


@dataclass
class CellResult:
    gamma: float
    mode: str
    problem: Optional[QPProblem]
    solution: Optional[Solution]
    assignment: Optional[FlowAssignment]
    metrics: Optional[Metrics]
    status: str
    error: str = ""

    def row(self) -> ResultRow:
        if self.metrics is None:
            nan = float("nan")
            return ResultRow(self.gamma, self.mode, self.status, nan, nan, nan, nan,
                             self.solution.iterations if self.solution else 0)
        return ResultRow(
            gamma=self.gamma,
            mode=self.mode,
            status=self.status,
            objective_hours=self.solution.objective,
            societal_latency_minutes=self.metrics.societal_latency * MINUTES_PER_HOUR,
            parcel_latency_minutes=self.metrics.parcel_latency * MINUTES_PER_HOUR,
            operational_cost=self.metrics.operational_cost,
            iterations=self.solution.iterations,
            edge_truck_flows=list(self.assignment.edge_flow),
            path_flows=list(self.assignment.path_flow),
            drone_demands=list(self.assignment.drone_demand),
        )


def run_cell(network: Network, paths: PathSet, gamma: float, mode: str,
             config: Optional[SolverConfig] = None) -> CellResult:
    """Assemble, solve and evaluate one cell; failures end up in ``status``."""
    try:
        problem = assemble_qp(network, paths, gamma, mode)
    except BimodalError as exc:
        return CellResult(gamma, mode, None, None, None, None, INFEASIBLE, str(exc))
    solution = solve(problem, config)
    if solution.status == INFEASIBLE:
        return CellResult(gamma, mode, problem, solution, None, None, solution.status, "phase-1 found no feasible flow")
    # interior iterates may sit a hair below zero
    assignment = derive_flows(network, paths, np.maximum(solution.f, 0.0))
    return CellResult(gamma, mode, problem, solution, assignment,
                      metrics(network, paths, assignment, gamma), solution.status)


def sweep(network: Network, paths: PathSet, gammas: Sequence[float], modes: Sequence[str] = MODES,
          config: Optional[SolverConfig] = None, jobs: int = 1) -> list[CellResult]:
    """Every (gamma, mode) cell, ordered gamma-major regardless of ``jobs``."""
    cells = [(g, m) for g in gammas for m in modes]
    if jobs <= 1:
        return [run_cell(network, paths, g, m, config) for g, m in cells]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda gm: run_cell(network, paths, gm[0], gm[1], config), cells))
