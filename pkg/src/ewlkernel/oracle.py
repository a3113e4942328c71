"""Brute-force reference computations for checking the fast kernels.

Nothing here imports the production modules: graphs are taken as plain
adjacency lists plus a label list, trees are unrolled straight from all-pairs
distances, and subtrees are compared through their string encodings.
Everything is exponential somewhere; keep inputs small.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

INF = float("inf")


@dataclass(frozen=True)
class ExplicitTree:
    label: int
    children: tuple["ExplicitTree", ...] = ()

    def encode(self) -> str:
        return f"{self.label}(" + ",".join(sorted(c.encode() for c in self.children)) + ")"

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def sorted(self) -> "ExplicitTree":
        """Same tree with children ordered by (label, encoding)."""
        kids = sorted((c.sorted() for c in self.children), key=lambda t: (t.label, t.encode()))
        return ExplicitTree(self.label, tuple(kids))


def all_pairs_distances(adjacency: Sequence[Sequence[int]]) -> list[list[float]]:
    n = len(adjacency)
    d = [[INF] * n for _ in range(n)]
    for i in range(n):
        d[i][i] = 0
        for j in adjacency[i]:
            d[i][j] = 1
    for k in range(n):
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            for j in range(n):
                if dik + d[k][j] < d[i][j]:
                    d[i][j] = dik + d[k][j]
    return d


def tree_visit(
    adjacency: Sequence[Sequence[int]],
    labels: Sequence[int],
    root: int,
    r: int,
    dist: list[list[float]] | None = None,
    limit: int = 10**6,
) -> ExplicitTree:
    """Unrolled breadth-first visit of the depth-``r`` shortest-path DAG at ``root``."""
    if dist is None:
        dist = all_pairs_distances(adjacency)
    budget = [limit]

    def build(u: int) -> ExplicitTree:
        budget[0] -= 1
        if budget[0] < 0:
            raise OverflowError("tree visit exceeds the explosion limit")
        du = dist[root][u]
        kids = ()
        if du < r:
            kids = tuple(build(w) for w in adjacency[u] if dist[root][w] == du + 1)
        return ExplicitTree(labels[u], kids)

    return build(root)


def enumerate_proper_subtrees(tree: ExplicitTree) -> list[str]:
    """Encoding of the subtree below every node, one entry per node."""
    out = [tree.encode()]
    for c in tree.children:
        out.extend(enumerate_proper_subtrees(c))
    return out


def _size_of_encoding(enc: str) -> int:
    return enc.count("(")


def naive_st_kernel(tree_a: ExplicitTree, tree_b: ExplicitTree, lam: float) -> float:
    """Sum of ``lam ** |t|`` over all pairs of equal proper subtrees."""
    sa = enumerate_proper_subtrees(tree_a)
    sb = enumerate_proper_subtrees(tree_b)
    total = 0.0
    for ta in sa:
        for tb in sb:
            if ta == tb:
                total += lam ** _size_of_encoding(ta)
    return total


def naive_st_graph_kernel(
    adj_a: Sequence[Sequence[int]],
    labels_a: Sequence[int],
    adj_b: Sequence[Sequence[int]],
    labels_b: Sequence[int],
    r: int,
    lam: float,
) -> float:
    """Double sum over node pairs of the ST kernel between their tree visits.

    Pairs are counted through per-tree subtree multisets, which gives the same
    sum as comparing every subtree pair one by one.
    """
    da, db = all_pairs_distances(adj_a), all_pairs_distances(adj_b)
    ca = [Counter(enumerate_proper_subtrees(tree_visit(adj_a, labels_a, v, r, da))) for v in range(len(adj_a))]
    cb = [Counter(enumerate_proper_subtrees(tree_visit(adj_b, labels_b, v, r, db))) for v in range(len(adj_b))]
    total = 0.0
    for x in ca:
        for y in cb:
            for enc in sorted(x.keys() & y.keys()):
                total += x[enc] * y[enc] * lam ** _size_of_encoding(enc)
    return total


def naive_delta_kernel(labels_a: Sequence[int], labels_b: Sequence[int]) -> int:
    total = 0
    for x in labels_a:
        for y in labels_b:
            if x == y:
                total += 1
    return total


def count_shortest_paths(adjacency: Sequence[Sequence[int]], s: int, t: int) -> int:
    """Number of shortest ``s``-``t`` paths by exhaustive simple-path search.

    Path lengths are tried in increasing order; the first length admitting a
    path is the distance. Returns 0 when ``t`` is unreachable.
    """
    n = len(adjacency)
    if s == t:
        return 1

    def count(u: int, remaining: int, visited: set[int]) -> int:
        if remaining == 0:
            return 1 if u == t else 0
        total = 0
        for w in adjacency[u]:
            if w not in visited:
                visited.add(w)
                total += count(w, remaining - 1, visited)
                visited.discard(w)
        return total

    for length in range(1, n):
        c = count(s, length, {s})
        if c:
            return c
    return 0


def naive_wl_labels(
    adjacency: Sequence[Sequence[int]], labels: Sequence[int], iterations: int
) -> list[str]:
    """Neighbour-multiset refinement with labels as nested strings (no interning)."""
    cur = [str(l) for l in labels]
    for _ in range(iterations):
        cur = [cur[v] + "[" + ",".join(sorted(cur[u] for u in adjacency[v])) + "]" for v in range(len(adjacency))]
    return cur


def brute_force_isomorphic(
    adj_a: Sequence[Sequence[int]],
    labels_a: Sequence[int],
    adj_b: Sequence[Sequence[int]],
    labels_b: Sequence[int],
) -> bool:
    """Exact isomorphism by trying every label-preserving bijection (tiny graphs)."""
    from itertools import permutations

    n = len(adj_a)
    if n != len(adj_b) or sorted(labels_a) != sorted(labels_b):
        return False
    ea = {frozenset((u, v)) for u in range(n) for v in adj_a[u]}
    eb = {frozenset((u, v)) for u in range(n) for v in adj_b[u]}
    if len(ea) != len(eb):
        return False
    for perm in permutations(range(n)):
        if any(labels_a[v] != labels_b[perm[v]] for v in range(n)):
            continue
        if all(frozenset((perm[u], perm[v])) in eb for u, v in (tuple(e) for e in ea)):
            return True
    return False
