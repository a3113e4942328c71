"""Weisfeiler-Lehman style iterative relabelling with pluggable signatures.

At every iteration each node receives the interned id of a signature of the
previous labelling: either its neighbour multiset (``"neighbor"``) or the
canonical form of its shortest-path DAG of depth ``r`` (``"dag"``).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

from .decomposition import Interner, ShortestPathDAG, encode_positions, extract_dag
from .graph import Graph

PiKind = Literal["neighbor", "dag"]


@dataclass(frozen=True)
class RelabelledGraph:
    source: Graph
    iteration: int
    labels: tuple[int, ...]
    pi_kind: PiKind
    interner: Interner
    depth: int | None = None

    def __post_init__(self) -> None:
        if len(self.labels) != self.source.node_count:
            raise ValueError("label vector length differs from node count")


@dataclass(frozen=True)
class WLTestResult:
    verdict: Literal["distinct", "inconclusive"]
    stabilization_index: tuple[int, int]
    final_color_multisets: tuple[tuple[int, ...], tuple[int, ...]]
    iterations: int


def neighbor_signature(rg: RelabelledGraph, v: int) -> tuple[int, tuple[int, ...]]:
    labels = rg.labels
    return labels[v], tuple(sorted(labels[u] for u in rg.source.adjacency[v]))


def dag_signature(
    rg: RelabelledGraph, v: int, r: int, dag: ShortestPathDAG | None = None
) -> int:
    """Canonical root id of D_r(v) labelled with ``rg``'s current labels.

    The id comes from ``rg.interner``, so it is already the new colour of ``v``.
    """
    if dag is None:
        dag = extract_dag(rg.source, v, r)
    return encode_positions(dag, rg.labels, rg.interner)[0]


def extract_all_dags(
    graphs: Sequence[Graph], r: int, threads: int = 1
) -> list[list[ShortestPathDAG]]:
    """D_r(v) for every node of every graph; structure does not depend on labels."""

    def one(g: Graph) -> list[ShortestPathDAG]:
        return [extract_dag(g, v, r) for v in range(g.node_count)]

    if threads > 1 and len(graphs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, graphs))
    return [one(g) for g in graphs]


def relabel_step(
    graphs: Sequence[Graph],
    labels: Sequence[Sequence[int]],
    pi: PiKind,
    interner: Interner,
    dags: Sequence[Sequence[ShortestPathDAG]] | None = None,
) -> list[tuple[int, ...]]:
    """One synchronous relabelling round over all graphs sharing ``interner``.

    Graphs and nodes are visited in order so that id assignment is
    reproducible.
    """
    out = []
    intern = interner.intern
    if pi == "neighbor":
        for g, lab in zip(graphs, labels):
            out.append(
                tuple(
                    intern((lab[v], tuple(sorted([lab[u] for u in g.adjacency[v]]))))
                    for v in range(g.node_count)
                )
            )
    elif pi == "dag":
        if dags is None:
            raise ValueError("dag signature requires precomputed DAGs")
        for gd, lab in zip(dags, labels):
            out.append(tuple(encode_positions(d, lab, interner)[0] for d in gd))
    else:
        raise ValueError(f"unknown signature kind {pi!r}")
    return out


def wl_iterate(
    graph: Graph,
    pi: PiKind,
    r: int | None,
    h: int,
    interner: Interner | None = None,
) -> list[RelabelledGraph]:
    """Relabellings ``G^0 .. G^h`` of one graph."""
    if h < 0:
        raise ValueError("h must be >= 0")
    if pi == "dag" and (r is None or r < 1):
        raise ValueError("dag signature needs depth r >= 1")
    interner = interner if interner is not None else Interner()
    depth = r if pi == "dag" else None
    dags = extract_all_dags([graph], r) if pi == "dag" else None
    labels = tuple(graph.node_labels)
    out = [RelabelledGraph(graph, 0, labels, pi, interner, depth)]
    for i in range(1, h + 1):
        (labels,) = relabel_step([graph], [labels], pi, interner, dags)
        out.append(RelabelledGraph(graph, i, labels, pi, interner, depth))
    return out


def partition_of(labels: Sequence[int]) -> tuple[int, ...]:
    """Labels renumbered by first occurrence; equal iff partitions are equal."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(l, len(seen)) for l in labels)


def wl_isomorphism_test(
    graph_a: Graph, graph_b: Graph, pi: PiKind = "neighbor", r: int | None = None
) -> WLTestResult:
    """Colour-refinement test run on both graphs in lockstep with one interner.

    Refinement continues until the joint node partition stops splitting; the
    per-graph stabilization index is the first iteration ``i`` whose own
    partition equals that of ``i + 1``.
    """
    if graph_a.node_count == 0 or graph_b.node_count == 0:
        raise ValueError("both graphs must be non-empty")
    if pi == "dag" and (r is None or r < 1):
        raise ValueError("dag signature needs depth r >= 1")
    graphs = [graph_a, graph_b]
    interner = Interner()
    dags = extract_all_dags(graphs, r) if pi == "dag" else None
    labels = [tuple(g.node_labels) for g in graphs]
    stab: list[int | None] = [None, None]
    limit = graph_a.node_count + graph_b.node_count + 1
    i = 0
    while True:
        nxt = relabel_step(graphs, labels, pi, interner, dags)
        for k in range(2):
            if stab[k] is None and partition_of(nxt[k]) == partition_of(labels[k]):
                stab[k] = i
        joint_stable = partition_of(labels[0] + labels[1]) == partition_of(nxt[0] + nxt[1])
        if joint_stable or i >= limit:
            break
        labels = nxt
        i += 1
    ms = (tuple(sorted(labels[0])), tuple(sorted(labels[1])))
    verdict = "distinct" if ms[0] != ms[1] else "inconclusive"
    return WLTestResult(verdict, (stab[0], stab[1]), ms, i)  # type: ignore[arg-type]
