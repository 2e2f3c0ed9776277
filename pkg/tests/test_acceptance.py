"""Acceptance gate. Each test appends one PASS/FAIL line to the summary report."""

import time

import numpy as np
import pytest

from bimodal_delivery.latency import LatencyPlane, LatencySample, edge_latency, fit_plane
from bimodal_delivery.objective import assemble_qp, evaluate, metrics
from bimodal_delivery.network import derive_flows
from bimodal_delivery.paths import enumerate_paths
from bimodal_delivery.pipeline import MINUTES_PER_HOUR
from bimodal_delivery.qp import OPTIMAL, grid_oracle, solve
from bimodal_delivery.scenario_io import sioux_falls

from conftest import ACCEPTANCE_LINES, random_feasible_flow, random_network, small_network

SLACK = 2e-6
GAMMAS = (0.0, 0.5, 1.0)

# published minute values (societal LS, parcel L) at gamma 0, 0.5, 1; used for trend direction only
REFERENCE = {
    "four-node": {
        "truck_only": ([1.98, 1.98, 1.98], [2.29, 1.81, 1.63]),
        "bimodal": ([1.86, 1.89, 1.93], [2.02, 1.70, 1.38]),
    },
    "sioux-falls": {
        "truck_only": ([9.33, 9.39, 9.51], [10.97, 8.94, 8.29]),
        "bimodal": ([8.70, 8.82, 9.00], [7.79, 7.33, 7.20]),
    },
}


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def test_1_sioux_falls_path_count():
    start = time.perf_counter()
    sc = sioux_falls()
    count = len(enumerate_paths(sc.network, 8))
    elapsed = time.perf_counter() - start
    report(1, count == 1133 and elapsed < 5.0, f"{count} simple paths with <= 8 edges in {elapsed:.2f} s")


def test_2_three_lane_classification(sioux):
    net, _ = sioux
    three = sum(e.lanes == 3 for e in net.road_edges)
    report(2, three == 24 and net.n_edges == 76, f"{three} of {net.n_edges} edges three-lane")


def test_3_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst, bad = 0.0, []
    for k in range(12):
        net, paths = small_network(rng)
        qp = assemble_qp(net, paths, float(rng.uniform(0, 1)))
        sol, oracle = solve(qp), grid_oracle(qp, 301)
        rel = abs(sol.objective - oracle.objective) / max(abs(oracle.objective), 1e-12)
        worst = max(worst, rel)
        if not (sol.status == OPTIMAL and rel <= 1e-3):
            bad.append((k, qp.n, rel, oracle.gap_bound / abs(oracle.objective), sol.objective <= oracle.objective))
    elapsed = time.perf_counter() - start
    # a mismatch where the solver is below the grid value and the gap is inside the
    # grid's own error bound is grid coarseness, not a solver error; it is still reported
    notes = "; ".join(f"network {k} ({n} paths) gap {rel:.2e} vs grid bound {bound:.2e}, solver lower {low}"
                      for k, n, rel, bound, low in bad)
    report(3, not bad and elapsed < 30.0,
           f"12 networks, worst relative gap {worst:.2e}, {elapsed:.1f} s" + (f"; {notes}" if notes else ""))


def test_4_objective_consistency():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        net = random_network(rng)
        paths = enumerate_paths(net, 8)
        gamma = float(rng.uniform(0, 1))
        f = random_feasible_flow(rng, net, paths)
        direct = metrics(net, paths, derive_flows(net, paths, f), gamma).objective
        worst = max(worst, abs(evaluate(assemble_qp(net, paths, gamma), f) - direct) / abs(direct))
    report(4, worst <= 1e-9, f"100 triples, worst relative error {worst:.2e}")


def test_5_psd(example, sioux):
    rng = np.random.default_rng(5)
    cases = [(*example, g) for g in GAMMAS] + [(*sioux, 1.0)]
    for _ in range(50):
        net = random_network(rng)
        cases.append((net, enumerate_paths(net, 8), float(rng.uniform(0, 1))))
    low = min(np.linalg.eigvalsh(assemble_qp(n, p, g).Q).min() for n, p, g in cases)
    report(5, low >= -1e-8, f"{len(cases)} problems, minimum eigenvalue {low:.2e}")


def by_mode(cells):
    out = {}
    for c in cells:
        out.setdefault(c.mode, []).append(c)
    return out


@pytest.mark.parametrize("name", ["four-node", "sioux-falls"])
def test_6_drone_benefit_and_monotonicity(name, example_cells, sioux_cells):
    cells = by_mode(example_cells if name == "four-node" else sioux_cells)
    both, trucks = cells["bimodal"], cells["truck_only"]
    assert all(c.status == OPTIMAL for c in both + trucks)
    benefit = all(b.solution.objective <= t.solution.objective + SLACK for b, t in zip(both, trucks))
    mono = True
    for mode in (both, trucks):
        L = [c.metrics.parcel_latency for c in mode]
        LS = [c.metrics.societal_latency for c in mode]
        mono &= bool(np.all(np.diff(L) <= SLACK) and np.all(np.diff(LS) >= -SLACK))
    report(6, benefit and mono, f"{name}: drones never hurt {benefit}, trade-off monotone {mono}")


def test_7_plane_fit_recovery():
    truth = LatencyPlane((0.1, 0.01, 0.001))
    rng = np.random.default_rng(7)

    def samples(noise, n):
        out = []
        for _ in range(n):
            total = rng.uniform(10, 3000)
            truck = rng.uniform(0.001, 0.1) * total
            out.append(LatencySample(truck, total, edge_latency(truth, truck, total - truck) + rng.uniform(-noise, noise)))
        return out

    err = np.max(np.abs(np.array(fit_plane(samples(0.0, 20)).plane.omega) - truth.omega))
    rmse = fit_plane(samples(1e-3, 500)).rmse
    report(7, err <= 1e-9 and rmse <= 1e-3, f"noiseless max error {err:.1e}, noisy rmse {rmse:.2e}")


def trends(ls, lat, ls_other=None, lat_other=None):
    """Directions: parcel latency falls and societal latency rises with gamma; drones lower both."""
    out = {
        "parcel non-increasing": bool(np.all(np.diff(lat) <= SLACK)),
        "societal non-decreasing": bool(np.all(np.diff(ls) >= -SLACK)),
    }
    if ls_other is not None:
        out["drones lower parcel"] = bool(np.all(np.array(lat) <= np.array(lat_other) + SLACK))
        out["drones lower societal"] = bool(np.all(np.array(ls) <= np.array(ls_other) + SLACK))
    return out


@pytest.mark.parametrize("name", ["four-node", "sioux-falls"])
def test_8_trend_directions_match_reference(name, example_cells, sioux_cells):
    # exact minute values depend on unpublished planes and demands, so only directions are compared
    cells = by_mode(example_cells if name == "four-node" else sioux_cells)
    ours = {m: ([c.metrics.societal_latency * MINUTES_PER_HOUR for c in cs],
                [c.metrics.parcel_latency * MINUTES_PER_HOUR for c in cs]) for m, cs in cells.items()}
    ref = REFERENCE[name]
    ref_trends = trends(*ref["bimodal"], *ref["truck_only"])
    our_trends = trends(*ours["bimodal"], *ours["truck_only"])
    ref_trends.update({f"truck_only {k}": v for k, v in trends(*ref["truck_only"]).items()})
    our_trends.update({f"truck_only {k}": v for k, v in trends(*ours["truck_only"]).items()})
    mismatched = [k for k in ref_trends if ref_trends[k] != our_trends[k]]
    values = ", ".join(f"{m} LS {np.round(ls, 2).tolist()} L {np.round(lat, 2).tolist()}"
                       for m, (ls, lat) in ours.items())
    report(8, not mismatched, f"{name}: {len(ref_trends)} trend directions compared, "
           f"mismatched {mismatched}; ours (min) {values}")


def test_9_kkt_certification(example_cells, sioux_cells):
    rng = np.random.default_rng(9)
    sols = [c.solution for c in example_cells + sioux_cells if c.status == OPTIMAL]
    for _ in range(20):
        net = random_network(rng)
        sols.append(solve(assemble_qp(net, enumerate_paths(net, 8), float(rng.uniform(0, 1)))))
    optimal = [s for s in sols if s.status == OPTIMAL]
    worst = max(s.kkt.max() for s in optimal)
    report(9, worst <= 1e-6 and len(optimal) == len(sols),
           f"{len(optimal)} optimal solutions, worst KKT residual {worst:.1e}")
