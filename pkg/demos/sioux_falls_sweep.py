"""Sioux Falls with hub node 10: the with/without drones experiment grid.

Importing the bundled TNTP files and enumerating paths takes well under a
second; each of the six solves has 1133 path variables.

    python3 demos/sioux_falls_sweep.py [--jobs 3]
"""
import argparse
import time

from bimodal_delivery.paths import enumerate_paths
from bimodal_delivery.pipeline import MINUTES_PER_HOUR, sweep
from bimodal_delivery.scenario_io import sioux_falls


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--jobs", type=int, default=3)
    args = parser.parse_args()

    start = time.perf_counter()
    sc = sioux_falls()
    paths = enumerate_paths(sc.network, sc.max_edges)
    three = sum(e.lanes == 3 for e in sc.network.road_edges)
    print(f"{len(paths)} paths, {three} three-lane edges, {time.perf_counter() - start:.2f} s")

    for c in sweep(sc.network, paths, [0.0, 0.5, 1.0], jobs=args.jobs):
        print(f"gamma={c.gamma:.1f} {c.mode:>10}: LS {c.metrics.societal_latency * MINUTES_PER_HOUR:6.3f} min, "
              f"L {c.metrics.parcel_latency * MINUTES_PER_HOUR:6.3f} min, {c.solution.iterations} iterations")
    print(f"total {time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
