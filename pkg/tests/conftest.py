from __future__ import annotations

import pytest

from streammap.graph_stream import GraphHeader, InMemoryGraph, NodeRecord


def graph_from_edges(n: int, edges: list[tuple[int, int]]) -> InMemoryGraph:
    """Unit-weight graph from an undirected edge list on nodes 0..n-1."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    records = [
        NodeRecord(i, 1, tuple((v, 1) for v in sorted(adj[i]))) for i in range(n)
    ]
    return InMemoryGraph(GraphHeader(n, len(edges)), records)


def path_graph(n: int) -> InMemoryGraph:
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def triangle() -> InMemoryGraph:
    return graph_from_edges(3, [(0, 1), (0, 2), (1, 2)])


def four_cycle() -> InMemoryGraph:
    return graph_from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def complete_graph(n: int) -> InMemoryGraph:
    return graph_from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


@pytest.fixture
def tmp_graph_file(tmp_path):
    """Write METIS text to a temp file and return its path."""

    def write(text: str, name: str = "g.graph"):
        p = tmp_path / name
        p.write_text(text, encoding="ascii")
        return p

    return write
