"""Seeded random graph generators for tests, verification and benchmarks."""

from __future__ import annotations

import random

from .graph import Dataset, Graph, LabelInterner


def gnp_graph(rng: random.Random, n: int, p: float, n_labels: int) -> Graph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    labels = [rng.randrange(n_labels) for _ in range(n)]
    return Graph.from_edges(labels, edges)


def degree_bounded_graph(
    rng: random.Random, n: int, max_degree: int, n_labels: int, attach: int = 2
) -> Graph:
    """Uniform attachment under a degree cap.

    Node ``k`` links to up to ``attach`` earlier nodes drawn uniformly among
    those whose degree is still below ``max_degree``.
    """
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    deg = [0] * n
    edges = []
    open_nodes: list[int] = []
    for k in range(n):
        m = min(attach, len(open_nodes), max_degree)
        for t in rng.sample(open_nodes, m):
            edges.append((t, k))
            deg[t] += 1
            deg[k] += 1
        open_nodes = [v for v in open_nodes if deg[v] < max_degree]
        if deg[k] < max_degree:
            open_nodes.append(k)
    labels = [rng.randrange(n_labels) for _ in range(n)]
    return Graph.from_edges(labels, edges)


def _interner(n_labels: int) -> LabelInterner:
    return LabelInterner(f"L{i}" for i in range(n_labels))


def random_dataset(
    seed: int,
    n_graphs: int,
    max_nodes: int,
    n_labels: int = 4,
    p: float | None = None,
    min_nodes: int = 1,
) -> Dataset:
    """Erdos-Renyi style graphs with 1..max_nodes nodes and random labels."""
    rng = random.Random(seed)
    graphs = []
    for _ in range(n_graphs):
        n = rng.randint(min_nodes, max_nodes)
        q = p if p is not None else rng.uniform(0.1, 0.6)
        graphs.append(gnp_graph(rng, n, q, n_labels))
    return Dataset(tuple(graphs), _interner(n_labels), name=f"random-{seed}")


def bounded_dataset(
    seed: int, n_graphs: int, n_nodes: int, max_degree: int = 4, n_labels: int = 4
) -> Dataset:
    rng = random.Random(seed)
    graphs = tuple(degree_bounded_graph(rng, n_nodes, max_degree, n_labels) for _ in range(n_graphs))
    classes = tuple(rng.randrange(2) for _ in range(n_graphs))
    return Dataset(graphs, _interner(n_labels), classes, name=f"bounded-{seed}")
