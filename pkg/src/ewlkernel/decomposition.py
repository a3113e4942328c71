"""Shortest-path DAG decomposition and canonical interning of rooted DAGs.

``extract_dag(g, v, r)`` builds the DAG of every shortest path that starts at
``v`` and reaches a node at most ``r`` hops away.  Nodes reached by several
shortest paths appear once, carrying a path ``multiplicity``; the tree visit of
the DAG (every node repeated once per path) is never built on the production
path, only its sizes via ``subtree_size``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .graph import Graph

DEFAULT_EXPLOSION_LIMIT = 10**6


class Interner:
    """Injective get-or-insert table from hashable forms to dense ids.

    Safe for concurrent use: equal forms always receive the same id.
    """

    def __init__(self, keep_reverse: bool = False):
        self._table: dict[Hashable, int] = {}
        self._lock = threading.Lock()
        self._reverse: list[Hashable] | None = [] if keep_reverse else None

    def intern(self, form: Hashable) -> int:
        try:
            return self._table[form]
        except KeyError:
            pass
        with self._lock:
            idx = self._table.get(form)
            if idx is None:
                idx = len(self._table)
                self._table[form] = idx
                if self._reverse is not None:
                    self._reverse.append(form)
            return idx

    def form_of(self, idx: int) -> Hashable:
        if self._reverse is None:
            raise LookupError("interner was created without a reverse table")
        return self._reverse[idx]

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, form: Hashable) -> bool:
        return form in self._table


def _check_root(graph: Graph, root: int) -> None:
    if not 0 <= root < graph.node_count:
        raise IndexError(f"root {root} is not a node of a {graph.node_count}-node graph")


def bfs_levels(graph: Graph, root: int, r: int) -> dict[int, int]:
    """Hop distance from ``root`` to every node at most ``r`` hops away."""
    _check_root(graph, root)
    if r < 1:
        raise ValueError(f"depth must be >= 1, got {r}")
    dist = {root: 0}
    frontier = [root]
    adj = graph.adjacency
    for d in range(1, r + 1):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return dist


@dataclass
class ShortestPathDAG:
    """Rooted shortest-path DAG in positional form.

    Position ``p`` refers to graph node ``nodes[p]``; positions are in BFS
    order so every child has a larger position than each of its parents.
    ``children[p]`` holds child positions.  ``canonical_id`` is filled by
    :func:`canonical_encode` and reflects the most recent labelling.
    """

    root: int
    depth_bound: int
    nodes: tuple[int, ...]
    level: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    multiplicity: tuple[int, ...]
    subtree_size: tuple[int, ...]
    canonical_id: list[int] | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def position(self) -> dict[int, int]:
        return {v: p for p, v in enumerate(self.nodes)}

    def edges(self) -> set[tuple[int, int]]:
        """DAG edges as ``(parent, child)`` pairs of graph node indices."""
        nodes = self.nodes
        return {(nodes[p], nodes[c]) for p, ch in enumerate(self.children) for c in ch}

    def levels(self) -> dict[int, int]:
        return dict(zip(self.nodes, self.level))

    def multiplicities(self) -> dict[int, int]:
        return dict(zip(self.nodes, self.multiplicity))

    def tree_size(self) -> int:
        """Node count of the tree visit rooted at the DAG root."""
        return self.subtree_size[0]


def extract_dag(graph: Graph, root: int, r: int) -> ShortestPathDAG:
    """Build D_r(root): nodes within ``r`` hops and every level-increasing edge."""
    _check_root(graph, root)
    if r < 1:
        raise ValueError(f"depth must be >= 1, got {r}")
    adj = graph.adjacency
    pos = {root: 0}
    nodes = [root]
    level = [0]
    children: list[list[int]] = [[]]
    mult = [1]
    frontier = [0]
    for d in range(1, r + 1):
        nxt: list[int] = []
        for pu in frontier:
            ch = children[pu]
            mu = mult[pu]
            for w in adj[nodes[pu]]:
                pw = pos.get(w)
                if pw is None:
                    pw = len(nodes)
                    pos[w] = pw
                    nodes.append(w)
                    level.append(d)
                    children.append([])
                    mult.append(0)
                    nxt.append(pw)
                elif level[pw] != d:
                    continue
                ch.append(pw)
                mult[pw] += mu
        if not nxt:
            break
        frontier = nxt
    n = len(nodes)
    size = [1] * n
    for p in range(n - 1, -1, -1):
        for c in children[p]:
            size[p] += size[c]
    return ShortestPathDAG(
        root=root,
        depth_bound=r,
        nodes=tuple(nodes),
        level=tuple(level),
        children=tuple(tuple(c) for c in children),
        multiplicity=tuple(mult),
        subtree_size=tuple(size),
    )


def encode_positions(dag: ShortestPathDAG, labels: Sequence[int], interner: Interner) -> list[int]:
    """Canonical ids of every sub-DAG, bottom-up, without touching ``dag``.

    The form of a position is ``(label, sorted child ids)``; two positions get
    the same id exactly when their unrolled trees coincide.
    """
    nodes = dag.nodes
    children = dag.children
    intern = interner.intern
    ids = [0] * len(nodes)
    for p in range(len(nodes) - 1, -1, -1):
        ch = children[p]
        if ch:
            ids[p] = intern((labels[nodes[p]], tuple(sorted([ids[c] for c in ch]))))
        else:
            ids[p] = intern((labels[nodes[p]], ()))
    return ids


def canonical_encode(dag: ShortestPathDAG, labels: Sequence[int], interner: Interner) -> int:
    """Fill ``dag.canonical_id`` under ``labels`` and return the root's id."""
    dag.canonical_id = encode_positions(dag, labels, interner)
    return dag.canonical_id[0]


def materialize_tree(
    dag: ShortestPathDAG,
    labels: Sequence[int] | None = None,
    limit: int = DEFAULT_EXPLOSION_LIMIT,
) -> tuple:
    """Unroll the DAG into its tree visit as nested ``(label, children)`` tuples.

    Without ``labels`` the tree carries graph node indices instead.  Raises
    ``OverflowError`` when the tree would exceed ``limit`` nodes.
    """
    if dag.subtree_size[0] > limit:
        raise OverflowError(f"tree visit has {dag.subtree_size[0]} nodes, limit is {limit}")
    nodes, children = dag.nodes, dag.children
    tag = (lambda v: labels[v]) if labels is not None else (lambda v: v)
    built: dict[int, tuple] = {}
    for p in range(len(nodes) - 1, -1, -1):
        built[p] = (tag(nodes[p]), tuple(built[c] for c in children[p]))
    return built[0]


def tree_node_count(tree: tuple) -> int:
    return 1 + sum(tree_node_count(c) for c in tree[1])


def dump_dag(dag: ShortestPathDAG, label_names: Sequence[str], feature_of=None) -> list[str]:
    """Text rendering, one DAG node per line in BFS order, indented by level."""
    ids = dag.canonical_id
    out = []
    for p, v in enumerate(dag.nodes):
        if ids is None:
            cid = "-"
        else:
            cid = ids[p] if feature_of is None else feature_of(ids[p])
        kids = ",".join(str(dag.nodes[c]) for c in dag.children[p])
        out.append(
            f"{'  ' * dag.level[p]}{label_names[v]} node={v} level={dag.level[p]} "
            f"mult={dag.multiplicity[p]} id={cid} children=[{kids}]"
        )
    return out
