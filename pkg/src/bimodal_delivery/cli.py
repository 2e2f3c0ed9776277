"""Command-line front end.

Exit codes: 0 success, 1 validation or feasibility failure, 2 solver did not
converge, 3 I/O error. Set ``BIMODAL_LOG`` (e.g. ``DEBUG``) for log output.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from . import latency
from .errors import BimodalError, DegenerateSamplesError, NonPhysicalPlaneError
from .network import validate
from .objective import MODES
from .paths import enumerate_paths
from .pipeline import run_cell, sweep
from .qp import INFEASIBLE, OPTIMAL, SolverConfig
from .scenario_io import (
    TntpOptions,
    dump_document,
    export_results,
    import_tntp,
    load_scenario,
    sioux_falls_files,
)

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _modes(text):
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"modes must be drawn from {', '.join(MODES)}")
    return modes


def _gamma(text):
    g = float(text)
    if not 0.0 <= g <= 1.0:
        raise argparse.ArgumentTypeError(f"gamma must lie in [0, 1], got {g}")
    return g


def _load(args, check=True):
    scenario = load_scenario(args.scenario, check=check)
    max_edges = args.max_edges if getattr(args, "max_edges", None) else scenario.max_edges
    return scenario, max_edges


def cmd_validate(args):
    scenario, _ = _load(args, check=False)
    violations = validate(scenario.network)
    for v in violations:
        print(v)
    if violations:
        return EXIT_INVALID
    net = scenario.network
    print(f"ok: {net.n_nodes} nodes, {net.n_edges} road edges, {len(net.aerial_edges)} aerial edges")
    return EXIT_OK


def cmd_paths(args):
    scenario, max_edges = _load(args)
    paths = enumerate_paths(scenario.network, max_edges)
    names = scenario.network.names
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["path_id", "destination", "edge_ids"])
        for p in paths:
            writer.writerow([p.id, names[p.destination], " ".join(str(e) for e in p.edges)])
    finally:
        if args.output:
            out.close()
    if paths.unreachable:
        print("unreachable within cap: " + ", ".join(names[v] for v in paths.unreachable), file=sys.stderr)
    print(len(paths), file=sys.stderr if not args.output else sys.stdout)
    return EXIT_OK


def cmd_fit(args):
    samples = latency.read_samples(args.samples)
    try:
        fit = latency.fit_plane(samples)
    except (DegenerateSamplesError, NonPhysicalPlaneError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = fit.plane.to_json()
    if args.output:
        latency.save_plane(fit.plane, args.output)
    print(text)
    print(f"samples={fit.n_samples} rmse={fit.rmse:.6g} max_residual={fit.max_residual:.6g} "
          f"condition={fit.condition:.3g}", file=sys.stderr)
    return EXIT_OK


def _config(args):
    return SolverConfig(kkt_tolerance=args.tol)


def _status_exit(statuses):
    if any(s == INFEASIBLE for s in statuses):
        return EXIT_INVALID
    if any(s != OPTIMAL for s in statuses):
        return EXIT_SOLVER
    return EXIT_OK


def cmd_solve(args):
    scenario, max_edges = _load(args)
    paths = enumerate_paths(scenario.network, max_edges)
    cell = run_cell(scenario.network, paths, args.gamma, args.mode, _config(args))
    row = cell.row()
    if cell.metrics is not None:
        print(f"status={cell.status} iterations={row.iterations} objective_hours={row.objective_hours:.10g}")
        print(f"societal_latency_minutes={row.societal_latency_minutes:.6f}")
        print(f"parcel_latency_minutes={row.parcel_latency_minutes:.6f}")
        print(f"operational_cost={row.operational_cost:.4f}")
    else:
        print(f"status={cell.status} {cell.error}")
    if args.output:
        export_results([row], args.output)
    return _status_exit([cell.status])


def cmd_sweep(args):
    scenario, max_edges = _load(args)
    paths = enumerate_paths(scenario.network, max_edges)
    cells = sweep(scenario.network, paths, args.gammas, args.modes, _config(args), args.jobs)
    rows = [c.row() for c in cells]
    for r in rows:
        print(f"gamma={r.gamma:g} mode={r.mode} status={r.status} "
              f"societal={r.societal_latency_minutes:.4f}min parcel={r.parcel_latency_minutes:.4f}min "
              f"cost={r.operational_cost:.2f}")
    if args.output:
        export_results(rows, args.output)
    return _status_exit([c.status for c in cells])


def cmd_import_tntp(args):
    bundled = sioux_falls_files()
    net = args.net or bundled[0]
    nodes = args.nodes or bundled[1]
    flows = args.flows or bundled[2]
    options = TntpOptions(hub=args.hub, demand=args.demand, beta=args.beta, cost_cap=args.cost_cap,
                          coordinate_units=args.coordinate_units)
    text = dump_document(import_tntp(net, nodes, flows, options))
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="bimodal", description="Truck + drone delivery routing")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_arg(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file")

    p = sub.add_parser("validate", help="check a scenario's structural invariants")
    scenario_arg(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("paths", help="list candidate truck paths as CSV")
    scenario_arg(p)
    p.add_argument("--max-edges", type=int, default=None, help="path edge cap (default: scenario value, else 8)")
    p.add_argument("--output", help="CSV destination (default stdout)")
    p.set_defaults(func=cmd_paths)

    p = sub.add_parser("fit", help="fit a latency plane to samples")
    p.add_argument("--samples", required=True, help="CSV with truck_flow,total_flow,latency_hours")
    p.add_argument("--output", help="write plane JSON here")
    p.set_defaults(func=cmd_fit)

    for name, func in (("solve", cmd_solve), ("sweep", cmd_sweep)):
        p = sub.add_parser(name, help=f"{name} the routing problem")
        scenario_arg(p)
        if name == "solve":
            p.add_argument("--gamma", type=_gamma, default=0.5)
            p.add_argument("--mode", choices=MODES, default="bimodal")
        else:
            p.add_argument("--gammas", type=_floats, default=[0.0, 0.5, 1.0])
            p.add_argument("--mode", dest="modes", type=_modes, default=list(MODES),
                           help="comma-separated subset of bimodal,truck_only")
            p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--max-edges", type=int, default=None, help="path edge cap (default: scenario value, else 8)")
        p.add_argument("--tol", type=float, default=1e-6, help="KKT tolerance")
        p.add_argument("--output", help="results CSV")
        p.set_defaults(func=func)

    p = sub.add_parser("import-tntp", help="convert TNTP files to a scenario (default: bundled Sioux Falls)")
    p.add_argument("--net")
    p.add_argument("--nodes")
    p.add_argument("--flows")
    p.add_argument("--hub", type=int, default=10)
    p.add_argument("--demand", type=float, default=5000.0)
    p.add_argument("--beta", type=float, default=81_000.0)
    p.add_argument("--cost-cap", type=float, default=50_000.0)
    p.add_argument("--coordinate-units", choices=("auto", "degrees", "planar"), default="auto")
    p.add_argument("--output")
    p.set_defaults(func=cmd_import_tntp)
    return parser


def main(argv=None):
    logging.basicConfig(level=os.environ.get("BIMODAL_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "gammas", None) is not None:
        if not args.gammas or any(not 0.0 <= g <= 1.0 for g in args.gammas):
            print("error: --gammas must be non-empty values in [0, 1]", file=sys.stderr)
            return EXIT_INVALID
    try:
        return args.func(args)
    except BimodalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
