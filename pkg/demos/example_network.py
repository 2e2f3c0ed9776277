"""Four-node example: how drones and the trade-off weight shape the routing.

Solves the bundled example at a few gamma values with and without drones and
prints latencies in minutes, the drone share and the KKT certificate.

    python3 demos/example_network.py
"""
import numpy as np

from bimodal_delivery.paths import enumerate_paths
from bimodal_delivery.pipeline import MINUTES_PER_HOUR, sweep
from bimodal_delivery.scenario_io import example_network


def main():
    sc = example_network()
    net = sc.network
    paths = enumerate_paths(net, sc.max_edges)
    print(f"{net.n_nodes} nodes, {net.n_edges} road edges, {len(paths)} truck paths")
    print(f"{'gamma':>5} {'mode':>10} {'L (min)':>8} {'LS (min)':>8} {'drones':>7} {'cost':>9} {'kkt':>8}")
    for c in sweep(net, paths, np.linspace(0, 1, 5)):
        share = c.assignment.drone_demand.sum() / net.total_demand
        print(f"{c.gamma:5.2f} {c.mode:>10} {c.metrics.parcel_latency * MINUTES_PER_HOUR:8.3f} "
              f"{c.metrics.societal_latency * MINUTES_PER_HOUR:8.3f} {share:7.1%} "
              f"{c.metrics.operational_cost:9.1f} {c.solution.kkt.max():8.1e}")


if __name__ == "__main__":
    main()
