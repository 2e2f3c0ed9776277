"""Interior-point solutions against the brute-force grid on a tiny routing problem.

Three nodes and three truck paths. The grid value approaches the solver value
from above as the resolution grows, always within the reported bound (the
largest gradient norm over the box times the cell diameter).
"""
from bimodal_delivery.latency import LatencyPlane
from bimodal_delivery.network import AerialEdge, Constants, Network, RoadEdge
from bimodal_delivery.objective import assemble_qp
from bimodal_delivery.paths import enumerate_paths
from bimodal_delivery.qp import grid_oracle, solve


def tiny_network(cost_cap):
    plane = LatencyPlane((0.02, 4e-4, 5e-5))
    road = [RoadEdge(0, 0, 1, 1.0, 2, 800.0, plane),
            RoadEdge(1, 1, 2, 1.0, 2, 300.0, plane),
            RoadEdge(2, 0, 2, 2.0, 3, 1500.0, plane)]
    aerial = [AerialEdge(0, 0, 1, 0.08), AerialEdge(1, 0, 2, 0.15)]
    return Network(["hub", "a", "b"], 0, road, aerial, [0.0, 600.0, 900.0],
                   Constants(parcels_per_truck=50, truck_cost=30, drone_cost=0.5,
                             beta=2600, cost_cap=cost_cap))


def main():
    # the second cap binds, putting the optimum on a slanted face of the feasible set
    for cap in (1e5, 800.0):
        net = tiny_network(cap)
        paths = enumerate_paths(net, 8)
        qp = assemble_qp(net, paths, 0.5)
        sol = solve(qp)
        print(f"cost cap {cap:g}: {qp.n} paths, solver {sol.objective:.8f} "
              f"({sol.iterations} iterations, kkt {sol.kkt.max():.1e})")
        for r in (31, 101, 301, 1001):
            o = grid_oracle(qp, r)
            print(f"  grid {r:>5}: {o.objective:.8f}  excess {o.objective - sol.objective:.2e}  bound {o.gap_bound:.2e}")


if __name__ == "__main__":
    main()
