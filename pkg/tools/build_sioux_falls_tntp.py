"""Regenerate the bundled Sioux Falls TNTP files.

The network (capacities, free-flow times, BPR parameters, node coordinates)
and the 24x24 trip table are read from the Sioux Falls reference project
shipped inside the ``aequilibrae`` wheel. Link volumes are recomputed by
solving the BPR user-equilibrium (Beckmann) program with cvxpy, because the
"best known flow" file is not part of that archive. The resulting relative
gap is about 1e-6, which reproduces the published volumes to roughly four
significant digits.

Usage::

    pip download --no-deps aequilibrae -d /tmp/aeq
    python tools/build_sioux_falls_tntp.py /tmp/aeq/aequilibrae-*.whl

Needs h5py and cvxpy, which are not runtime dependencies of the package.
"""
import io
import sqlite3
import struct
import sys
import tempfile
import zipfile
from pathlib import Path

import cvxpy as cp
import h5py
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

OUT = Path(__file__).resolve().parents[1] / "src" / "bimodal_delivery" / "data" / "sioux_falls"


def extract(wheel, workdir):
    with zipfile.ZipFile(wheel) as w:
        inner = w.read("aequilibrae/reference_files/sioux_falls.zip")
    with zipfile.ZipFile(io.BytesIO(inner)) as z:
        z.extractall(workdir)
    return Path(workdir)


def read_project(root):
    con = sqlite3.connect(root / "project_database.sqlite")
    links = list(con.execute(
        "select a_node, b_node, capacity_ab, free_flow_time, b, power "
        "from links order by link_id"))
    nodes = []
    for node_id, geom in con.execute("select node_id, geometry from nodes order by node_id"):
        # spatialite point blob: 43-byte header, then little-endian x, y
        x, y = struct.unpack("<dd", geom[43:59])
        nodes.append((node_id, x, y))
    with h5py.File(root / "matrices" / "demand.omx") as f:
        trips = f["data/matrix"][:]
    return links, nodes, trips


def user_equilibrium(links, trips):
    n = trips.shape[0]
    m = len(links)
    tail = np.array([l[0] - 1 for l in links])
    head = np.array([l[1] - 1 for l in links])
    cap = np.array([l[2] for l in links])
    t0 = np.array([l[3] for l in links], dtype=float)
    bpr_b = np.array([l[4] for l in links])
    incidence = np.zeros((n, m))
    incidence[tail, np.arange(m)] = -1.0
    incidence[head, np.arange(m)] = 1.0

    unit = 1e4
    x_by_origin = cp.Variable((m, n), nonneg=True)
    cons = []
    for o in range(n):
        dest = trips[o].copy()
        dest[o] = 0.0
        rhs = dest / unit
        rhs[o] = -dest.sum() / unit
        cons.append(incidence @ x_by_origin[:, o] == rhs)
    u = cp.multiply(cp.sum(x_by_origin, axis=1), unit / cap)
    obj = cp.sum(cp.multiply(t0 * cap / unit, u + cp.multiply(bpr_b / 5, cp.power(u, 5))))
    cp.Problem(cp.Minimize(obj), cons).solve(solver=cp.CLARABEL, max_iter=1000)
    flow = np.asarray(cp.sum(x_by_origin, axis=1).value) * unit
    cost = t0 * (1 + bpr_b * (flow / cap) ** 4)

    # relative gap against an all-or-nothing assignment
    graph = csr_matrix((cost, (tail, head)), shape=(n, n))
    _, pred = dijkstra(graph, return_predecessors=True)
    index = {(i, j): k for k, (i, j) in enumerate(zip(tail, head))}
    aon = np.zeros(m)
    for o in range(n):
        for d in range(n):
            if o != d and trips[o, d] > 0:
                v = d
                while v != o:
                    u_ = pred[o, v]
                    aon[index[u_, v]] += trips[o, d]
                    v = u_
    gap = (cost @ flow - cost @ aon) / (cost @ flow)
    return flow, cost, gap


def write_files(links, nodes, flow, cost):
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "SiouxFalls_net.tntp", "w") as f:
        f.write("<NUMBER OF ZONES> 24\n<NUMBER OF NODES> 24\n<FIRST THRU NODE> 1\n")
        f.write(f"<NUMBER OF LINKS> {len(links)}\n<END OF METADATA>\n\n\n")
        f.write("~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower\tspeed\ttoll\tlink_type\t;\n")
        for a, b, capacity, fft, bpr_b, power in links:
            f.write(f"\t{a}\t{b}\t{capacity}\t{fft}\t{fft}\t{bpr_b}\t{power}\t0\t0\t1\t;\n")
    with open(OUT / "SiouxFalls_node.tntp", "w") as f:
        f.write("Node\tX\tY\t;\n")
        for node_id, x, y in nodes:
            f.write(f"{node_id}\t{x:.8f}\t{y:.8f}\t;\n")
    with open(OUT / "SiouxFalls_flow.tntp", "w") as f:
        f.write("From \tTo \tVolume \tCost \n")
        for (a, b, *_), v, c in zip(links, flow, cost):
            f.write(f"{a}\t{b}\t{v:.6f}\t{c:.6f}\n")


def main(wheel):
    with tempfile.TemporaryDirectory() as tmp:
        root = extract(wheel, tmp)
        links, nodes, trips = read_project(root)
        flow, cost, gap = user_equilibrium(links, trips)
    print(f"links={len(links)} nodes={len(nodes)} trips={trips.sum():.0f} relative_gap={gap:.2e}")
    write_files(links, nodes, flow, cost)


if __name__ == "__main__":
    main(sys.argv[1])
