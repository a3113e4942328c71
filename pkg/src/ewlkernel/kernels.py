"""Base kernels, the extended WL framework sum and Gram-matrix assembly.

Every kernel here is an explicit feature map.  A feature is keyed by
``(r, i, id)``: the depth, the WL iteration and an interned id from the
``(signature, r)`` interner.  For the subtree kernel each feature also carries
the node count of its subtree, and two equal features contribute
``lambda ** size`` per matching pair.  Gram matrices are accumulated as
integer match counts per subtree size and only then weighted, which keeps
values bit-identical under node permutations, label renaming and thread
count.
"""

from __future__ import annotations

import enum
import math
import time
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .decomposition import Interner, encode_positions, extract_dag
from .graph import Dataset, Graph
from .relabeling import RelabelledGraph, extract_all_dags, relabel_step


class ConfigError(ValueError):
    pass


class KernelKind(str, enum.Enum):
    FS = "fs"
    ODD_ST = "odd-st"
    WL_NS_DDK = "wl-nsddk"
    WL_DDK = "wl-ddk"

    @property
    def uses_subtrees(self) -> bool:
        return self in (KernelKind.ODD_ST, KernelKind.WL_DDK)

    @property
    def signature(self) -> str:
        return "neighbor" if self is KernelKind.FS else "dag"


@dataclass(frozen=True)
class KernelConfig:
    kind: KernelKind
    K: int = 1
    h: int = 0
    lam: float = 1.0
    normalize: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.K < 1:
            raise ConfigError(f"K must be >= 1, got {self.K}")
        if self.h < 0:
            raise ConfigError(f"h must be >= 0, got {self.h}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ConfigError(f"lambda must be a positive real, got {self.lam}")
        if self.kind is KernelKind.FS and self.K != 1:
            raise ConfigError("FS requires K=1")
        if self.kind is KernelKind.ODD_ST and self.h != 0:
            raise ConfigError("ODD-ST requires h=0")

    def header(self, n: int) -> str:
        return (
            f"# kernel={self.kind.value} K={self.K} h={self.h} lambda={self.lam!r} "
            f"normalize={int(self.normalize)} n={n}"
        )


@dataclass
class FeatureVector:
    """Sparse nonnegative feature map; zero entries are never stored."""

    entries: dict[int, float] = field(default_factory=dict)

    def add(self, key: int, weight: float) -> None:
        if weight > 0:
            self.entries[key] = self.entries.get(key, 0.0) + weight

    def dot(self, other: "FeatureVector") -> float:
        a, b = self.entries, other.entries
        if len(b) < len(a):
            a, b = b, a
        if not a or not b or max(a) < min(b) or max(b) < min(a):
            return 0.0
        total = 0.0
        for k in sorted(a.keys() & b.keys()):
            total += a[k] * b[k]
        return total

    def __len__(self) -> int:
        return len(self.entries)


# --- base kernels on one relabelled pair --------------------------------------


def _same_run(a: RelabelledGraph, b: RelabelledGraph) -> None:
    if a.interner is not b.interner:
        raise ValueError("relabelled graphs come from different interners")


def delta_base_kernel(a: RelabelledGraph, b: RelabelledGraph) -> int:
    """Number of node pairs with equal labels, via a merge of sorted label lists."""
    _same_run(a, b)
    la, lb = sorted(a.labels), sorted(b.labels)
    i = j = total = 0
    na, nb = len(la), len(lb)
    while i < na and j < nb:
        x, y = la[i], lb[j]
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            ci = i
            while i < na and la[i] == x:
                i += 1
            cj = j
            while j < nb and lb[j] == x:
                j += 1
            total += (i - ci) * (j - cj)
    return total


def st_weight(lam: float, size: int) -> float:
    """Per-occurrence weight whose square is ``lam ** size``."""
    return math.sqrt(lam) ** size


def st_feature_vector(rg: RelabelledGraph, r: int, lam: float) -> FeatureVector:
    """Proper-subtree features of every tree visit T(v), v in the graph."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    counts, sizes = _st_counts(
        [extract_dag(rg.source, v, r) for v in range(rg.source.node_count)],
        rg.labels,
        rg.interner,
    )
    fv = FeatureVector()
    for cid in sorted(counts):
        fv.add(cid, counts[cid] * st_weight(lam, sizes[cid]))
    return fv


def st_base_kernel(a: RelabelledGraph, b: RelabelledGraph, r: int, lam: float) -> float:
    _same_run(a, b)
    return st_feature_vector(a, r, lam).dot(st_feature_vector(b, r, lam))


def _st_counts(dags, labels, interner: Interner) -> tuple[Counter, dict[int, int]]:
    counts: Counter = Counter()
    sizes: dict[int, int] = {}
    for dag in dags:
        ids = encode_positions(dag, labels, interner)
        for p, cid in enumerate(ids):
            counts[cid] += dag.multiplicity[p]
            sizes[cid] = dag.subtree_size[p]
    return counts, sizes


# --- the framework feature map -------------------------------------------------

# size used for delta-kernel features; they are matched with weight 1
_DELTA = 0


@dataclass
class FrameworkFeatures:
    """Integer feature counts of a dataset under one kernel configuration.

    ``counts[g]`` maps ``(r, i, id)`` to an occurrence count and ``size`` maps
    each key to its subtree size (``0`` for delta features).  ``dags`` is kept
    only when requested, for debug dumps.
    """

    config: KernelConfig
    counts: list[dict[tuple[int, int, int], int]]
    size: dict[tuple[int, int, int], int]
    timings: dict[str, float]
    dag_ids: dict | None = None

    def keys(self) -> list[tuple[int, int, int]]:
        return sorted(self.size)

    def weight(self, key: tuple[int, int, int]) -> float:
        s = self.size[key]
        return 1.0 if s == _DELTA else st_weight(self.config.lam, s)


def framework_features(
    graphs: Sequence[Graph],
    config: KernelConfig,
    threads: int = 1,
    keep_dags: bool = False,
) -> FrameworkFeatures:
    """Features of every (r, i) term of the framework sum for all graphs.

    DAG structure is extracted once per depth (optionally in parallel);
    relabelling runs synchronously across graphs so interned ids, and hence
    all outputs, do not depend on ``threads``.
    """
    n = len(graphs)
    counts: list[dict[tuple[int, int, int], int]] = [dict() for _ in range(n)]
    size: dict[tuple[int, int, int], int] = {}
    timings = {"dags": 0.0, "relabel": 0.0}
    dag_ids: dict | None = {} if keep_dags else None
    kind = config.kind

    for r in range(1, config.K + 1):
        interner = Interner()
        dags = None
        if kind.signature == "dag":
            t0 = time.perf_counter()
            dags = extract_all_dags(graphs, r, threads)
            timings["dags"] += time.perf_counter() - t0
        t0 = time.perf_counter()
        labels: list[Sequence[int]] = [g.node_labels for g in graphs]
        for i in range(config.h + 1):
            if kind.uses_subtrees:
                next_labels = []
                for gi in range(n):
                    c = counts[gi]
                    roots = []
                    for v, dag in enumerate(dags[gi]):
                        ids = encode_positions(dag, labels[gi], interner)
                        roots.append(ids[0])
                        mult, sub = dag.multiplicity, dag.subtree_size
                        for p, cid in enumerate(ids):
                            key = (r, i, cid)
                            c[key] = c.get(key, 0) + mult[p]
                            size[key] = sub[p]
                        if dag_ids is not None:
                            dag_ids[(gi, v, r, i)] = (dag, ids)
                    next_labels.append(tuple(roots))
                labels = next_labels
            else:
                for gi in range(n):
                    c = counts[gi]
                    for lab in labels[gi]:
                        key = (r, i, lab)
                        c[key] = c.get(key, 0) + 1
                        size[key] = _DELTA
                if i < config.h:
                    labels = relabel_step(graphs, labels, kind.signature, interner, dags)
        timings["relabel"] += time.perf_counter() - t0
    return FrameworkFeatures(config, counts, size, timings, dag_ids)


def feature_vectors(feats: FrameworkFeatures) -> tuple[list[FeatureVector], dict]:
    """Weighted per-graph vectors over dense feature ids (ascending key order)."""
    index = {k: j for j, k in enumerate(feats.keys())}
    out = []
    for c in feats.counts:
        fv = FeatureVector()
        for k in sorted(c, key=index.__getitem__):
            fv.add(index[k], c[k] * feats.weight(k))
        out.append(fv)
    return out, index


def _graded_gram(feats: FrameworkFeatures, threads: int = 1) -> np.ndarray:
    """Sum over subtree sizes s (ascending) of weight(s) * integer match counts."""
    n = len(feats.counts)
    by_size: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for k in feats.keys():
        by_size[feats.size[k]].append(k)
    out = np.zeros((n, n), dtype=np.float64)
    for s in sorted(by_size):
        col = {k: j for j, k in enumerate(by_size[s])}
        rows, cols, vals = [], [], []
        for g, c in enumerate(feats.counts):
            for k, cnt in c.items():
                j = col.get(k)
                if j is not None:
                    rows.append(g)
                    cols.append(j)
                    vals.append(cnt)
        X = sp.csr_matrix(
            (np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(n, len(col))
        )
        M = _int_products(X, threads)
        w = 1.0 if s == _DELTA else feats.config.lam ** s
        out += w * M.astype(np.float64)
    return out


def _int_products(X: sp.csr_matrix, threads: int) -> np.ndarray:
    """Exact ``X @ X.T`` in int64, upper triangle mirrored for exact symmetry."""
    n = X.shape[0]
    XT = X.T.tocsc()
    if threads > 1 and n > 64:
        bounds = np.linspace(0, n, threads + 1, dtype=int)

        def block(k: int) -> np.ndarray:
            return (X[bounds[k] : bounds[k + 1]] @ XT).toarray()

        with ThreadPoolExecutor(max_workers=threads) as pool:
            M = np.vstack(list(pool.map(block, range(threads))))
    else:
        M = (X @ XT).toarray()
    up = np.triu(M)
    return up + np.triu(M, 1).T


# --- public kernel API -------------------------------------------------------


@dataclass
class GramMatrix:
    values: np.ndarray
    config: KernelConfig
    graph_ids: tuple[str, ...]
    wall_time: float
    normalized: bool = False
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def framework_kernel(graph_a: Graph, graph_b: Graph, config: KernelConfig) -> float:
    """Sum over r = 1..K and i = 0..h of the base kernel on the relabelled pair.

    Both graphs must take their label ids from the same label interner.
    """
    feats = framework_features([graph_a, graph_b], config)
    return float(_graded_gram(feats)[0, 1])


def gram(dataset: Dataset | Sequence[Graph], config: KernelConfig, threads: int = 1) -> GramMatrix:
    graphs = dataset.graphs if isinstance(dataset, Dataset) else tuple(dataset)
    ids = dataset.graph_ids if isinstance(dataset, Dataset) else tuple(map(str, range(len(graphs))))
    if not graphs:
        raise ValueError("dataset is empty")
    t0 = time.perf_counter()
    feats = framework_features(graphs, config, threads)
    t1 = time.perf_counter()
    values = _graded_gram(feats, threads)
    t2 = time.perf_counter()
    g = GramMatrix(values, config, ids, 0.0, timings={**feats.timings, "features": t1 - t0, "products": t2 - t1})
    if config.normalize:
        g = normalize(g)
    g.wall_time = time.perf_counter() - t0
    return g


def normalize(g: GramMatrix | np.ndarray) -> GramMatrix | np.ndarray:
    """Cosine normalisation ``K[i,j] / sqrt(K[i,i] K[j,j])``."""
    values = g.values if isinstance(g, GramMatrix) else np.asarray(g, dtype=np.float64)
    d = np.diag(values).copy()
    if np.any(d <= 0):
        bad = int(np.flatnonzero(d <= 0)[0])
        raise ValueError(f"non-positive diagonal entry at {bad}")
    s = np.sqrt(d)
    out = values / np.outer(s, s)
    out = np.triu(out) + np.triu(out, 1).T
    np.fill_diagonal(out, 1.0)
    if isinstance(g, GramMatrix):
        return GramMatrix(out, g.config, g.graph_ids, g.wall_time, True, dict(g.timings))
    return out


def is_psd(values: np.ndarray, rel_tol: float = 1e-6) -> tuple[bool, float, float]:
    ev = np.linalg.eigvalsh(values)
    lo, hi = float(ev[0]), float(ev[-1])
    return lo >= -rel_tol * max(hi, 0.0), lo, hi


# --- output formats ------------------------------------------------------------


def format_dense(g: GramMatrix) -> str:
    lines = [g.config.header(g.n)]
    for row in g.values:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def format_precomputed(g: GramMatrix, classes: Iterable[int] | None = None) -> str:
    """One line per graph: ``<class> 0:<row> 1:<v1> 2:<v2> ...`` (1-based row)."""
    cls = list(classes) if classes is not None else [0] * g.n
    lines = []
    for i, row in enumerate(g.values):
        cells = " ".join(f"{j + 1}:{v:.17g}" for j, v in enumerate(row))
        lines.append(f"{cls[i]} 0:{i + 1} {cells}")
    return "\n".join(lines) + "\n"


def parse_dense(text: str) -> tuple[dict[str, str], np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = {}
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            k, _, v = tok.partition("=")
            header[k] = v
        lines = lines[1:]
    return header, np.array([[float(x) for x in ln.split()] for ln in lines])
