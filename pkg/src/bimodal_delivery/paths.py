"""Enumeration of hub-rooted simple truck paths and aerial paths."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PathLimitError
from .network import Network

DEFAULT_PATH_LIMIT = 1_000_000


@dataclass(frozen=True)
class Path:
    id: int
    edges: tuple[int, ...]
    nodes: tuple[int, ...]

    @property
    def destination(self) -> int:
        return self.nodes[-1]

    def __len__(self):
        return len(self.edges)


@dataclass(frozen=True)
class AerialPath:
    id: int
    edge: int
    destination: int
    latency: float


@dataclass(frozen=True, eq=False)
class PathSet:
    paths: tuple[Path, ...]
    max_edges: int
    by_destination: dict = field(default_factory=dict)
    by_edge: dict = field(default_factory=dict)
    unreachable: tuple[int, ...] = ()

    def __len__(self):
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __getitem__(self, i):
        return self.paths[i]

    def edge_incidence(self, n_edges: int) -> np.ndarray:
        """(E, P) 0/1 matrix; entry (e, p) is 1 when path p uses edge e."""
        out = np.zeros((n_edges, len(self.paths)))
        for p in self.paths:
            out[list(p.edges), p.id] = 1.0
        return out

    def terminal_incidence(self, n_nodes: int) -> np.ndarray:
        """(V, P) 0/1 matrix; entry (v, p) is 1 when path p ends at v."""
        out = np.zeros((n_nodes, len(self.paths)))
        for p in self.paths:
            out[p.destination, p.id] = 1.0
        return out


def enumerate_paths(network: Network, max_edges: int = 8, limit: int = DEFAULT_PATH_LIMIT) -> PathSet:
    """All simple directed paths leaving the hub with at most ``max_edges`` edges.

    Paths come out in lexicographic order of their node sequence (then edge
    ids, for parallel edges), so variable indices are stable between runs.
    Non-hub nodes that no path reaches are listed in ``unreachable``.
    """
    if max_edges < 1:
        raise DomainError(f"max_edges must be >= 1, got {max_edges}")
    adj = [sorted(es, key=lambda e: (e.head, e.id)) for es in network.out_edges()]

    found: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    on_path = [False] * network.n_nodes
    on_path[network.hub] = True
    nodes = [network.hub]
    edges: list[int] = []
    # explicit stack of neighbour iterators keeps deep caps off the recursion limit
    stack = [iter(adj[network.hub])]
    while stack:
        e = next(stack[-1], None)
        if e is None:
            stack.pop()
            if edges:
                on_path[nodes.pop()] = False
                edges.pop()
            continue
        if on_path[e.head]:
            continue
        nodes.append(e.head)
        edges.append(e.id)
        on_path[e.head] = True
        found.append((tuple(nodes), tuple(edges)))
        if len(found) > limit:
            raise PathLimitError(f"more than {limit} paths with <= {max_edges} edges; lower max_edges")
        if len(edges) < max_edges:
            stack.append(iter(adj[e.head]))
        else:
            on_path[nodes.pop()] = False
            edges.pop()

    paths = tuple(Path(i, es, ns) for i, (ns, es) in enumerate(found))
    by_destination: dict[int, list[int]] = {}
    by_edge: dict[int, list[int]] = {}
    for p in paths:
        by_destination.setdefault(p.destination, []).append(p.id)
        for e in p.edges:
            by_edge.setdefault(e, []).append(p.id)
    unreachable = tuple(v for v in range(network.n_nodes) if v != network.hub and v not in by_destination)
    return PathSet(paths, max_edges, by_destination, by_edge, unreachable)


def aerial_paths(network: Network) -> list[AerialPath]:
    return [AerialPath(i, e.id, e.head, e.latency) for i, e in enumerate(network.aerial_edges)]


def check_path(network: Network, path: Path, max_edges: int | None = None) -> list[str]:
    """Independent structural check of one path; returns problems found."""
    problems = []
    if not path.edges:
        return ["empty path"]
    edges = [network.road_edges[e] for e in path.edges]
    if edges[0].tail != network.hub:
        problems.append("does not start at hub")
    for a, b in zip(edges, edges[1:]):
        if a.head != b.tail:
            problems.append(f"edges {a.id} and {b.id} do not chain")
    visited = [edges[0].tail] + [e.head for e in edges]
    if len(set(visited)) != len(visited):
        problems.append("repeats a node")
    if tuple(visited) != path.nodes:
        problems.append("node sequence does not match edges")
    if max_edges is not None and len(edges) > max_edges:
        problems.append(f"longer than {max_edges} edges")
    return problems
