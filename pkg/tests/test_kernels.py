import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewlkernel import oracle
from ewlkernel.decomposition import Interner, encode_positions, extract_dag
from ewlkernel.graph import Dataset, Graph
from ewlkernel.kernels import (
    ConfigError,
    FeatureVector,
    GramMatrix,
    KernelConfig,
    KernelKind,
    delta_base_kernel,
    feature_vectors,
    format_dense,
    format_precomputed,
    framework_features,
    framework_kernel,
    gram,
    is_psd,
    normalize,
    parse_dense,
    st_base_kernel,
    st_feature_vector,
)
from ewlkernel.relabeling import wl_iterate
from ewlkernel.synthetic import gnp_graph, random_dataset

ALL_KINDS = list(KernelKind)


def cfg(kind, K=1, h=0, lam=1.0, normalize=False):
    if kind is KernelKind.FS:
        K = 1
    if kind is KernelKind.ODD_ST:
        h = 0
    return KernelConfig(kind, K, h, lam, normalize)


def pair(ga, gb, pi="dag", r=2):
    it = Interner()
    return wl_iterate(ga, pi, r, 0, it)[0], wl_iterate(gb, pi, r, 0, it)[0]


# --- config ----------------------------------------------------------------


def test_config_invariants():
    with pytest.raises(ConfigError):
        KernelConfig(KernelKind.FS, K=2)
    with pytest.raises(ConfigError):
        KernelConfig(KernelKind.ODD_ST, K=2, h=1)
    with pytest.raises(ConfigError):
        KernelConfig(KernelKind.WL_DDK, lam=0)
    with pytest.raises(ConfigError):
        KernelConfig(KernelKind.WL_DDK, K=0)
    assert KernelConfig("wl-ddk").kind is KernelKind.WL_DDK


# --- delta base kernel ---------------------------------------------------------


def test_delta_fig1_self(fig1):
    a, b = pair(fig1[0], fig1[0])
    assert delta_base_kernel(a, b) == 4


def test_delta_counts():
    ga = Graph.from_edges([0, 0, 1], [])
    gb = Graph.from_edges([0, 1, 1], [])
    a, b = pair(ga, gb)
    assert delta_base_kernel(a, b) == 4


def test_delta_disjoint_and_mismatch():
    ga = Graph.from_edges([0, 0], [])
    gb = Graph.from_edges([1, 2], [])
    a, b = pair(ga, gb)
    assert delta_base_kernel(a, b) == 0
    other = wl_iterate(gb, "dag", 1, 0)[0]
    with pytest.raises(ValueError):
        delta_base_kernel(a, other)


# --- ST base kernel ------------------------------------------------------------


def test_st_single_node():
    g = Graph.from_edges([0], [])
    rg = wl_iterate(g, "dag", 3, 0)[0]
    fv = st_feature_vector(rg, 3, 1.0)
    assert list(fv.entries.values()) == [1.0]
    a, b = pair(g, Graph.from_edges([0], []))
    assert st_base_kernel(a, b, 2, 1.0) == 1
    a, b = pair(g, Graph.from_edges([1], []))
    assert st_base_kernel(a, b, 2, 1.0) == 0


def test_st_fig1_root_features(fig1):
    g = fig1[0]
    it = Interner(keep_reverse=True)
    # features contributed by the root s alone
    dag = extract_dag(g, 0, 2)
    ids = encode_positions(dag, g.node_labels, it)
    counts = {}
    for p, cid in enumerate(ids):
        counts[cid] = counts.get(cid, 0) + dag.multiplicity[p]
    s, b, e, d = (fig1.label_interner.id_of(x) for x in "sbed")
    leaf_d = it.intern((d, ()))
    b_d = it.intern((b, (leaf_d,)))
    e_d = it.intern((e, (leaf_d,)))
    assert counts == {leaf_d: 2, b_d: 1, e_d: 1, ids[0]: 1}
    assert sum(c * c for c in counts.values()) == 7


def test_st_path_ab():
    g = Graph.from_edges([0, 1], [(0, 1)])
    a, b = pair(g, Graph.from_edges([0, 1], [(0, 1)]), r=1)
    assert st_base_kernel(a, b, 1, 1.0) == 4
    assert len(st_feature_vector(a, 1, 1.0)) == 4
    want = oracle.naive_st_graph_kernel(g.adjacency, g.node_labels, g.adjacency, g.node_labels, 1, 1.0)
    assert want == 4


def test_feature_vector_dot():
    a = FeatureVector({1: 2.0, 5: 1.0})
    b = FeatureVector({5: 3.0, 9: 1.0})
    assert a.dot(b) == 3.0
    assert a.dot(FeatureVector({20: 1.0})) == 0.0
    z = FeatureVector()
    z.add(3, 0.0)
    assert len(z) == 0


small = st.builds(
    lambda seed, n, p: gnp_graph(random.Random(seed), n, p, 3),
    st.integers(0, 2**32),
    st.integers(1, 9),
    st.floats(0.1, 0.7),
)


@settings(max_examples=60, deadline=None)
@given(small, small, st.integers(1, 3), st.sampled_from([0.5, 1.0, 2.0]))
def test_st_matches_oracle(ga, gb, r, lam):
    a, b = pair(ga, gb, r=r)
    got = st_base_kernel(a, b, r, lam)
    want = oracle.naive_st_graph_kernel(ga.adjacency, ga.node_labels, gb.adjacency, gb.node_labels, r, lam)
    assert got == pytest.approx(want, rel=1e-9, abs=0)


@settings(max_examples=40, deadline=None)
@given(small, small, st.integers(1, 2))
def test_st_matches_oracle_after_relabelling(ga, gb, r):
    it = Interner()
    a = wl_iterate(ga, "dag", r, 2, it)[2]
    b = wl_iterate(gb, "dag", r, 2, it)[2]
    got = st_base_kernel(a, b, r, 0.7)
    want = oracle.naive_st_graph_kernel(ga.adjacency, a.labels, gb.adjacency, b.labels, r, 0.7)
    assert got == pytest.approx(want, rel=1e-9, abs=0)


@settings(max_examples=60, deadline=None)
@given(small, small)
def test_delta_matches_oracle(ga, gb):
    it = Interner()
    a = wl_iterate(ga, "neighbor", None, 2, it)
    b = wl_iterate(gb, "neighbor", None, 2, it)
    for x, y in zip(a, b):
        assert delta_base_kernel(x, y) == oracle.naive_delta_kernel(x.labels, y.labels)


# --- framework --------------------------------------------------------------


def test_framework_single_term_is_base_kernel(fig1):
    g = fig1[0]
    h = Graph.from_edges([0, 1, 3], [(0, 1), (1, 2)])
    a, b = pair(g, h, r=1)
    assert framework_kernel(g, h, cfg(KernelKind.WL_NS_DDK)) == delta_base_kernel(a, b)
    assert framework_kernel(g, h, cfg(KernelKind.FS)) == delta_base_kernel(a, b)
    assert framework_kernel(g, h, cfg(KernelKind.WL_DDK, lam=0.5)) == pytest.approx(
        st_base_kernel(a, b, 1, 0.5), rel=1e-12
    )


def test_framework_explicit_sum(fig1):
    # WL_DDK with K=2, h=1 against the double sum of base kernels
    g = fig1[0]
    h = Graph.from_edges([1, 0, 3, 3], [(0, 1), (1, 2), (1, 3)])
    total = 0.0
    for r in (1, 2):
        it = Interner()
        sa = wl_iterate(g, "dag", r, 1, it)
        sb = wl_iterate(h, "dag", r, 1, it)
        total += sum(st_base_kernel(x, y, r, 0.8) for x, y in zip(sa, sb))
    assert framework_kernel(g, h, KernelConfig(KernelKind.WL_DDK, 2, 1, 0.8)) == pytest.approx(total, rel=1e-12)

    total = 0
    for r in (1, 2):
        it = Interner()
        sa = wl_iterate(g, "dag", r, 3, it)
        sb = wl_iterate(h, "dag", r, 3, it)
        total += sum(delta_base_kernel(x, y) for x, y in zip(sa, sb))
    assert framework_kernel(g, h, KernelConfig(KernelKind.WL_NS_DDK, 2, 3)) == total


def test_reductions_on_random_pairs():
    ds = random_dataset(5, 200, 10)
    gs = ds.graphs
    for k in range(100):
        ga, gb = gs[2 * k], gs[2 * k + 1]
        for h in (0, 1, 3):
            assert framework_kernel(ga, gb, cfg(KernelKind.FS, h=h)) == framework_kernel(
                ga, gb, cfg(KernelKind.WL_NS_DDK, K=1, h=h)
            )
        assert framework_kernel(ga, gb, cfg(KernelKind.ODD_ST, K=2, lam=0.7)) == framework_kernel(
            ga, gb, KernelConfig(KernelKind.WL_DDK, 2, 0, 0.7)
        )


# --- gram -----------------------------------------------------------------------


def test_gram_single_graph(fig1):
    g = gram(fig1, cfg(KernelKind.WL_DDK, K=2, h=1))
    assert g.values.shape == (1, 1) and g.values[0, 0] > 0
    assert g.graph_ids == ("0",)


def test_gram_identical_graphs_normalized(fig1):
    ds = Dataset((fig1[0], fig1[0]), fig1.label_interner)
    for kind in ALL_KINDS:
        g = gram(ds, cfg(kind, K=2, h=2, lam=0.3, normalize=True))
        assert np.allclose(g.values, 1.0, atol=1e-12, rtol=0)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_gram_psd_and_matches_pairwise(kind):
    ds = random_dataset(17, 50, 20)
    config = cfg(kind, K=2, h=2, lam=0.6)
    g = gram(ds, config)
    ok, lo, hi = is_psd(g.values)
    assert ok, (lo, hi)
    assert np.array_equal(g.values, g.values.T)
    assert np.all(np.diag(g.values) > 0)
    for i, j in [(0, 1), (3, 7), (10, 10), (48, 2)]:
        assert g.values[i, j] == pytest.approx(framework_kernel(ds[i], ds[j], config), rel=1e-12)


def test_gram_threads_identical():
    ds = random_dataset(3, 150, 12)
    for kind in ALL_KINDS:
        config = cfg(kind, K=2, h=2, lam=0.9)
        a = gram(ds, config, threads=1).values
        b = gram(ds, config, threads=4).values
        assert a.tobytes() == b.tobytes()


def test_feature_dump_reproduces_gram():
    ds = random_dataset(8, 20, 12)
    for kind in ALL_KINDS:
        config = cfg(kind, K=2, h=2, lam=1.7)
        feats = framework_features(ds.graphs, config)
        vecs, _ = feature_vectors(feats)
        g = gram(ds, config).values
        for i in range(len(ds)):
            for j in range(len(ds)):
                assert vecs[i].dot(vecs[j]) == pytest.approx(g[i, j], rel=1e-9)


def test_monotone_in_h_and_K():
    ds = random_dataset(21, 30, 12)
    for kind in (KernelKind.WL_DDK, KernelKind.WL_NS_DDK):
        prev_h = None
        for h in range(4):
            vals = [gram(ds, KernelConfig(kind, K, h, 0.5)).values for K in (1, 2, 3)]
            assert np.all(vals[1] >= vals[0]) and np.all(vals[2] >= vals[1])
            if prev_h is not None:
                assert np.all(vals[0] >= prev_h)
            prev_h = vals[0]


# --- normalize ------------------------------------------------------------------


def test_normalize_examples():
    assert np.array_equal(normalize(np.eye(3)), np.eye(3))
    assert np.allclose(normalize(np.array([[4.0, 2.0], [2.0, 1.0]])), [[1, 1], [1, 1]], atol=1e-15)
    with pytest.raises(ValueError):
        normalize(np.array([[0.0, 0.0], [0.0, 1.0]]))


def test_normalize_bounded():
    ds = random_dataset(2, 30, 15)
    g = normalize(gram(ds, cfg(KernelKind.WL_DDK, K=3, h=1, lam=1.5)))
    assert isinstance(g, GramMatrix) and g.normalized
    assert np.all(np.abs(g.values) <= 1.0 + 1e-12)
    assert np.allclose(np.diag(g.values), 1.0, atol=1e-12)


# --- output formats ---------------------------------------------------------------


def test_dense_format_roundtrip():
    ds = random_dataset(4, 5, 8)
    g = gram(ds, KernelConfig(KernelKind.WL_DDK, 2, 1, 0.3, normalize=True))
    text = format_dense(g)
    head = text.splitlines()[0]
    assert head == "# kernel=wl-ddk K=2 h=1 lambda=0.3 normalize=1 n=5"
    header, values = parse_dense(text)
    assert header["n"] == "5"
    assert np.array_equal(values, g.values)


def test_precomputed_format():
    ds = random_dataset(4, 3, 5)
    g = gram(ds, cfg(KernelKind.FS, h=1))
    lines = format_precomputed(g, [1, -1, 1]).splitlines()
    assert len(lines) == 3
    tok = lines[1].split()
    assert tok[0] == "-1" and tok[1] == "0:2"
    assert [float(t.split(":")[1]) for t in tok[2:]] == list(g.values[1])
    assert [t.split(":")[0] for t in tok[2:]] == ["1", "2", "3"]


def test_label_string_renaming_invariance():
    import io

    from ewlkernel.graph import parse_gtx, write_gtx

    ds = random_dataset(31, 25, 10)
    buf = io.StringIO()
    write_gtx(ds, buf)
    text = buf.getvalue()
    # L0..L3 -> Q3..Q0
    renamed = text
    for i in range(4):
        renamed = renamed.replace(f" L{i}\n", f" tmp{3 - i}\n")
    renamed = renamed.replace(" tmp", " Q")
    other = parse_gtx(io.StringIO(renamed))
    for kind in ALL_KINDS:
        config = cfg(kind, K=3, h=2, lam=0.45)
        assert gram(ds, config).values.tobytes() == gram(other, config).values.tobytes()
