"""Labelled undirected graphs, datasets and the input corpus parsers.

Two on-disk layouts are understood:

* GTX, a single text file holding many graphs::

      # comment
      g <graph_id> [<class>]
      n <node_id> <label>
      e <u> <v>

* the multi-file sparse layout used by public graph-classification
  benchmarks (``*_A.txt``, ``*_graph_indicator.txt``, ``*_node_labels.txt``
  and optionally ``*_graph_labels.txt``), with 1-based global node ids.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

log = logging.getLogger(__name__)


class FormatError(ValueError):
    """Raised when an input corpus is malformed."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += source
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)


class LabelInterner:
    """Bijection between label strings and dense integer ids (first-seen order)."""

    def __init__(self, labels: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._labels: list[str] = []
        for lab in labels:
            self.intern(lab)

    def intern(self, label: str) -> int:
        idx = self._ids.get(label)
        if idx is None:
            idx = len(self._labels)
            self._ids[label] = idx
            self._labels.append(label)
        return idx

    def id_of(self, label: str) -> int:
        return self._ids[label]

    def label_of(self, idx: int) -> str:
        return self._labels[idx]

    def __contains__(self, idx: object) -> bool:
        return isinstance(idx, int) and 0 <= idx < len(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._labels)


@dataclass(frozen=True)
class Graph:
    """Immutable undirected node-labelled graph.

    ``adjacency[v]`` is the ascending tuple of neighbours of ``v`` and
    ``node_labels[v]`` the interned label id of ``v``. Use :meth:`from_edges`
    to build a graph with its invariants checked; the raw constructor does not
    validate so that :func:`validate` can report on arbitrary instances.
    """

    adjacency: tuple[tuple[int, ...], ...]
    node_labels: tuple[int, ...]
    max_outdegree: int = -1

    def __post_init__(self) -> None:
        if self.max_outdegree < 0:
            rho = max((len(a) for a in self.adjacency), default=0)
            object.__setattr__(self, "max_outdegree", rho)

    @classmethod
    def from_edges(
        cls, node_labels: Sequence[int], edges: Iterable[tuple[int, int]]
    ) -> "Graph":
        """Build a graph from undirected edges; rejects self-loops and repeats."""
        n = len(node_labels)
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) references a node outside 0..{n - 1}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if v in nbrs[u]:
                raise ValueError(f"duplicate edge ({u},{v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in nbrs), tuple(node_labels))

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges as ``(u, v)`` pairs with ``u < v``, sorted."""
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    def permuted(self, perm: Sequence[int]) -> "Graph":
        """Return the isomorphic copy in which node ``v`` becomes ``perm[v]``."""
        n = self.node_count
        labels = [0] * n
        for v in range(n):
            labels[perm[v]] = self.node_labels[v]
        return Graph.from_edges(labels, ((perm[u], perm[v]) for u, v in self.edges()))

    def relabelled(self, mapping: Sequence[int] | dict[int, int]) -> "Graph":
        """Same structure with every label id ``l`` replaced by ``mapping[l]``."""
        return Graph(self.adjacency, tuple(mapping[l] for l in self.node_labels))


@dataclass(frozen=True)
class Dataset:
    graphs: tuple[Graph, ...]
    label_interner: LabelInterner
    class_labels: tuple[int, ...] | None = None
    graph_ids: tuple[str, ...] = field(default=())
    name: str = ""

    def __post_init__(self) -> None:
        if not self.graph_ids:
            object.__setattr__(self, "graph_ids", tuple(str(i) for i in range(len(self.graphs))))
        if len(self.graph_ids) != len(self.graphs):
            raise ValueError("graph_ids length differs from number of graphs")
        if self.class_labels is not None and len(self.class_labels) != len(self.graphs):
            raise ValueError("class_labels length differs from number of graphs")

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, i: int) -> Graph:
        return self.graphs[i]


def validate(graph: Graph, label_interner: LabelInterner | None = None) -> list[str]:
    """List every violated graph invariant; an empty list means the graph is valid."""
    problems: list[str] = []
    n = len(graph.adjacency)
    if len(graph.node_labels) != n:
        problems.append(f"label count {len(graph.node_labels)} differs from node count {n}")
    for v, nb in enumerate(graph.adjacency):
        seen: set[int] = set()
        for u in nb:
            if not 0 <= u < n:
                problems.append(f"dangling edge ({v},{u})")
                continue
            if u == v:
                problems.append(f"self-loop at {v}")
            elif u in seen:
                problems.append(f"duplicate edge ({v},{u})")
            elif v not in graph.adjacency[u]:
                problems.append(f"asymmetric edge ({v},{u})")
            seen.add(u)
        if list(nb) != sorted(nb):
            problems.append(f"unsorted adjacency at {v}")
    rho = max((len(a) for a in graph.adjacency), default=0)
    if graph.max_outdegree != rho:
        problems.append(f"max_outdegree {graph.max_outdegree} differs from {rho}")
    if label_interner is not None:
        for v, lab in enumerate(graph.node_labels):
            if lab not in label_interner:
                problems.append(f"unregistered label id {lab} at {v}")
    return problems


# --- GTX -------------------------------------------------------------------


def parse_gtx(stream: TextIO | Iterable[str], name: str = "") -> Dataset:
    """Parse a GTX stream into a :class:`Dataset`.

    Raises :class:`FormatError` (carrying the 1-based line number) on any
    malformed line, duplicate node, undeclared endpoint, self-loop or repeated
    edge. Extra tokens after an edge are taken as an edge label and dropped.
    """
    interner = LabelInterner()
    graphs: list[Graph] = []
    ids: list[str] = []
    classes: list[int | None] = []
    cur: dict | None = None
    cur_line = 0
    warned_edge_labels = False

    def finish() -> None:
        if cur is None:
            return
        labels = cur["labels"]
        n = len(labels)
        missing = [i for i in range(n) if labels.get(i) is None]
        if missing or (labels and max(labels) != n - 1):
            raise FormatError(
                f"graph {cur['id']}: node ids must be contiguous from 0", cur_line, name or None
            )
        try:
            g = Graph.from_edges([labels[i] for i in range(n)], cur["edges"])
        except ValueError as exc:  # pragma: no cover - edges are checked per line
            raise FormatError(str(exc), cur_line, name or None) from exc
        graphs.append(g)

    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        kind = tok[0]
        try:
            if kind == "g":
                if len(tok) not in (2, 3):
                    raise FormatError("expected 'g <graph_id> [<class>]'", lineno, name or None)
                finish()
                cur = {"id": tok[1], "labels": {}, "edges": [], "seen": set()}
                cur_line = lineno
                ids.append(tok[1])
                classes.append(int(tok[2]) if len(tok) == 3 else None)
            elif kind == "n":
                if cur is None:
                    raise FormatError("node declared before any graph", lineno, name or None)
                if len(tok) != 3:
                    raise FormatError("expected 'n <node_id> <label>'", lineno, name or None)
                v = int(tok[1])
                if v < 0:
                    raise FormatError(f"negative node id {v}", lineno, name or None)
                if v in cur["labels"]:
                    raise FormatError(f"duplicate node id {v}", lineno, name or None)
                cur["labels"][v] = interner.intern(tok[2])
            elif kind == "e":
                if cur is None:
                    raise FormatError("edge declared before any graph", lineno, name or None)
                if len(tok) < 3:
                    raise FormatError("expected 'e <u> <v>'", lineno, name or None)
                if len(tok) > 3 and not warned_edge_labels:
                    log.warning("edge labels are ignored (first seen at line %d)", lineno)
                    warned_edge_labels = True
                u, v = int(tok[1]), int(tok[2])
                for x in (u, v):
                    if x not in cur["labels"]:
                        raise FormatError(f"edge references undeclared node {x}", lineno, name or None)
                if u == v:
                    raise FormatError(f"self-loop at {u}", lineno, name or None)
                key = (min(u, v), max(u, v))
                if key in cur["seen"]:
                    raise FormatError(f"duplicate edge ({u},{v})", lineno, name or None)
                cur["seen"].add(key)
                cur["edges"].append(key)
            else:
                raise FormatError(f"unknown record type {kind!r}", lineno, name or None)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"malformed line: {line!r}", lineno, name or None) from exc
    cur_line = lineno
    finish()

    class_labels: tuple[int, ...] | None = None
    if classes and all(c is not None for c in classes):
        class_labels = tuple(classes)  # type: ignore[arg-type]
    elif any(c is not None for c in classes):
        raise FormatError("class label given for some graphs but not all", source=name or None)
    return Dataset(tuple(graphs), interner, class_labels, tuple(ids), name)


def write_gtx(dataset: Dataset, stream: TextIO) -> None:
    lab = dataset.label_interner
    for i, g in enumerate(dataset.graphs):
        head = f"g {dataset.graph_ids[i]}"
        if dataset.class_labels is not None:
            head += f" {dataset.class_labels[i]}"
        stream.write(head + "\n")
        for v, l in enumerate(g.node_labels):
            stream.write(f"n {v} {lab.label_of(l)}\n")
        for u, v in g.edges():
            stream.write(f"e {u} {v}\n")


def load_gtx(path: str | os.PathLike) -> Dataset:
    with open(path) as fh:
        return parse_gtx(fh, name=os.path.basename(os.fspath(path)))


# --- sparse multi-file layout ------------------------------------------------


def _read_lines(src: TextIO | Iterable[str] | str | os.PathLike) -> list[tuple[int, str]]:
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            lines = fh.readlines()
    else:
        lines = list(src)
    return [(i, ln.strip()) for i, ln in enumerate(lines, start=1) if ln.strip()]


def parse_sparse_dir(
    edges: TextIO | Iterable[str] | str | os.PathLike,
    graph_indicator: TextIO | Iterable[str] | str | os.PathLike,
    node_labels: TextIO | Iterable[str] | str | os.PathLike,
    graph_labels: TextIO | Iterable[str] | str | os.PathLike | None = None,
    edge_labels: TextIO | Iterable[str] | str | os.PathLike | None = None,
    name: str = "",
) -> Dataset:
    """Assemble a dataset from the four-file sparse benchmark layout.

    Symmetric edge pairs (``i, j`` and ``j, i``) collapse to one undirected
    edge. An edge-label file, when given, is read only to warn that it is
    ignored.
    """
    indicator: list[int] = []
    for ln, text in _read_lines(graph_indicator):
        try:
            indicator.append(int(text))
        except ValueError as exc:
            raise FormatError(f"malformed graph indicator {text!r}", ln, "graph_indicator") from exc
    labels_raw = [(ln, text) for ln, text in _read_lines(node_labels)]
    if len(labels_raw) != len(indicator):
        raise FormatError(
            f"node-count mismatch: {len(indicator)} indicator lines vs {len(labels_raw)} node labels"
        )
    if edge_labels is not None and _read_lines(edge_labels):
        log.warning("edge labels are ignored")

    # graph ids must run 1..G with each graph's nodes contiguous
    starts: list[int] = []
    prev = 0
    for k, gid in enumerate(indicator):
        if gid == prev:
            continue
        if gid != prev + 1:
            raise FormatError(
                f"non-contiguous graph indicator: {gid} after {prev}", k + 1, "graph_indicator"
            )
        starts.append(k)
        prev = gid
    starts.append(len(indicator))
    n_graphs = len(starts) - 1

    interner = LabelInterner()
    label_ids = [interner.intern(text.split(",")[0].strip()) for _, text in labels_raw]

    per_graph: list[set[tuple[int, int]]] = [set() for _ in range(n_graphs)]
    total = len(indicator)
    for ln, text in _read_lines(edges):
        parts = text.replace(",", " ").split()
        if len(parts) != 2:
            raise FormatError(f"expected 'i, j' edge pair, got {text!r}", ln, "edges")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"malformed edge {text!r}", ln, "edges") from exc
        if not (1 <= i <= total and 1 <= j <= total):
            raise FormatError(f"edge ({i},{j}) references unknown node", ln, "edges")
        gi, gj = indicator[i - 1], indicator[j - 1]
        if gi != gj:
            raise FormatError(f"edge ({i},{j}) crosses graphs {gi} and {gj}", ln, "edges")
        if i == j:
            raise FormatError(f"self-loop at node {i}", ln, "edges")
        off = starts[gi - 1]
        a, b = i - 1 - off, j - 1 - off
        per_graph[gi - 1].add((min(a, b), max(a, b)))

    graphs = []
    for g in range(n_graphs):
        lo, hi = starts[g], starts[g + 1]
        graphs.append(Graph.from_edges(label_ids[lo:hi], sorted(per_graph[g])))

    classes = None
    if graph_labels is not None:
        cl = _read_lines(graph_labels)
        if len(cl) != n_graphs:
            raise FormatError(f"graph-label count {len(cl)} differs from graph count {n_graphs}")
        try:
            classes = tuple(int(t) for _, t in cl)
        except ValueError as exc:
            raise FormatError("malformed graph label", source="graph_labels") from exc
    ids = tuple(str(g + 1) for g in range(n_graphs))
    return Dataset(tuple(graphs), interner, classes, ids, name)


def load_sparse_dir(path: str | os.PathLike) -> Dataset:
    """Load ``<NAME>_A.txt`` and companions from a benchmark directory."""
    path = os.fspath(path)
    files = os.listdir(path)
    suffix = {
        "edges": "_A.txt",
        "graph_indicator": "_graph_indicator.txt",
        "node_labels": "_node_labels.txt",
        "graph_labels": "_graph_labels.txt",
        "edge_labels": "_edge_labels.txt",
    }
    found: dict[str, str] = {}
    for key, suf in suffix.items():
        hits = sorted(f for f in files if f.endswith(suf))
        if len(hits) > 1:
            raise FormatError(f"several *{suf} files in {path}")
        if hits:
            found[key] = os.path.join(path, hits[0])
    for key in ("edges", "graph_indicator", "node_labels"):
        if key not in found:
            raise FormatError(f"missing *{suffix[key]} in {path}")
    name = os.path.basename(found["edges"])[: -len(suffix["edges"])]
    return parse_sparse_dir(name=name, **found)
