"""Command-line front end: ``ewlk {gram,features,wl-test,bench,verify}``.

Exit codes: 0 success, 1 runtime or verification failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import gc
import io
import json
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import oracle
from .decomposition import Interner, dump_dag, extract_dag, encode_positions
from .graph import Dataset, FormatError, load_gtx, load_sparse_dir, write_gtx
from .kernels import (
    ConfigError,
    KernelConfig,
    KernelKind,
    delta_base_kernel,
    feature_vectors,
    format_dense,
    format_precomputed,
    framework_features,
    gram,
    st_base_kernel,
)
from .relabeling import wl_isomorphism_test, wl_iterate
from .synthetic import bounded_dataset, random_dataset


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    inputs: dict[str, str | None]
    config: dict | None = None
    threads: int = 1
    seed: int | None = None
    outputs: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _add_input(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="GTX file")
    src.add_argument("--sparse-dir", help="directory in the sparse multi-file layout")


def _add_kernel(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", choices=[k.value for k in KernelKind], default="wl-ddk")
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--h", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ewlk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gram", help="compute a Gram matrix")
    _add_input(p)
    _add_kernel(p)
    p.add_argument("--format", choices=["dense", "precomputed"], default="dense")
    p.add_argument("--out", required=True)

    p = sub.add_parser("features", help="dump per-graph sparse feature vectors")
    _add_input(p)
    _add_kernel(p)
    p.add_argument("--dump-dags", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("wl-test", help="1-dim WL style isomorphism test on two graphs")
    _add_input(p)
    p.add_argument("--pi", choices=["neighbor", "dag"], default="neighbor")
    p.add_argument("--r", type=int, default=1)

    p = sub.add_parser("bench", help="Gram-matrix timing sweep")
    p.add_argument("--input")
    p.add_argument("--sparse-dir")
    _add_kernel(p)
    p.add_argument("--sweep", required=True, help="PARAM=VALUES, e.g. h=1:5 or nodes=100,200,400")
    p.add_argument("--graphs", type=int, default=200)
    p.add_argument("--nodes", type=int, default=25)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--labels", type=int, default=4)
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("verify", help="check fast kernels against brute-force oracles")
    p.add_argument("--max-nodes", type=int, default=8)
    p.add_argument("--r", type=int, default=3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambdas", default="0.5,1,2")
    return parser


def _load(args) -> Dataset:
    if args.input:
        return load_gtx(args.input)
    if args.sparse_dir:
        return load_sparse_dir(args.sparse_dir)
    raise UsageError("one of --input or --sparse-dir is required")


def _config(args) -> KernelConfig:
    return KernelConfig(KernelKind(args.kernel), args.K, args.h, args.lam, args.normalize)


def _threads(args) -> int:
    t = args.threads if args.threads is not None else _default_threads()
    if t < 1:
        raise UsageError("--threads must be >= 1")
    return t


def _manifest(args, argv, config: KernelConfig | None, threads: int) -> RunManifest:
    cfg = None
    if config is not None:
        cfg = {**asdict(config), "kind": config.kind.value}
    return RunManifest(
        command=args.command,
        argv=list(argv),
        inputs={"input": getattr(args, "input", None), "sparse_dir": getattr(args, "sparse_dir", None)},
        config=cfg,
        threads=threads,
        seed=getattr(args, "seed", None),
    )


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def cmd_gram(args, argv) -> int:
    config = _config(args)
    threads = _threads(args)
    t0 = time.perf_counter()
    ds = _load(args)
    t_parse = time.perf_counter() - t0
    g = gram(ds, config, threads)
    if args.format == "dense":
        text = format_dense(g)
    else:
        text = format_precomputed(g, ds.class_labels)
    _write(args.out, text)
    m = _manifest(args, argv, config, threads)
    m.outputs = [args.out]
    m.timings = {"parse": t_parse, "gram": g.wall_time, **g.timings}
    m.write(args.out + ".manifest.json")
    print(f"gram n={g.n} wall_time={g.wall_time:.6f}s -> {args.out}")
    return 0


def cmd_features(args, argv) -> int:
    config = _config(args)
    threads = _threads(args)
    ds = _load(args)
    t0 = time.perf_counter()
    feats = framework_features(ds.graphs, config, threads, keep_dags=args.dump_dags)
    vecs, index = feature_vectors(feats)
    lines = [config.header(len(ds)) + f" features={len(index)}"]
    for gid, fv in zip(ds.graph_ids, vecs):
        cells = " ".join(f"{k}:{fv.entries[k]:.17g}" for k in sorted(fv.entries))
        lines.append(f"{gid} {cells}".rstrip())
    if args.dump_dags:
        names = ds.label_interner.labels
        dag_ids = feats.dag_ids or {}
        dags_needed = dag_ids or _delta_dags(ds, config)
        for key in sorted(dags_needed):
            gi, v, r, i = key
            dag, ids = dags_needed[key]
            dag.canonical_id = ids
            lab_names = [names[l] for l in ds.graphs[gi].node_labels]
            fid = (lambda c, r=r, i=i: index.get((r, i, c), "-")) if dag_ids else None
            lines.append(f"# dag graph={ds.graph_ids[gi]} root={v} r={r} i={i}")
            lines.extend("#   " + ln for ln in dump_dag(dag, lab_names, fid))
    _write(args.out, "\n".join(lines) + "\n")
    m = _manifest(args, argv, config, threads)
    m.outputs = [args.out]
    m.timings = {"features": time.perf_counter() - t0, **feats.timings}
    m.write(args.out + ".manifest.json")
    print(f"features n={len(ds)} dims={len(index)} -> {args.out}")
    return 0


def _delta_dags(ds: Dataset, config: KernelConfig) -> dict:
    """DAGs under original labels, for dumps of kernels without subtree features."""
    out = {}
    for r in range(1, (config.K if config.kind.signature == "dag" else 1) + 1):
        interner = Interner()
        for gi, g in enumerate(ds.graphs):
            for v in range(g.node_count):
                dag = extract_dag(g, v, r)
                out[(gi, v, r, 0)] = (dag, encode_positions(dag, g.node_labels, interner))
    return out


def cmd_wl_test(args, argv) -> int:
    ds = _load(args)
    if len(ds) != 2:
        raise UsageError(f"wl-test needs exactly two graphs, got {len(ds)}")
    if args.pi == "dag" and args.r < 1:
        raise UsageError("--r must be >= 1")
    res = wl_isomorphism_test(ds[0], ds[1], args.pi, args.r if args.pi == "dag" else None)
    a, b = res.stabilization_index
    print(f"{res.verdict} stabilization={a},{b}")
    return 0


_SWEEPABLE = {"h": int, "K": int, "lambda": float, "nodes": int, "graphs": int}


def parse_sweep(spec: str) -> tuple[str, list]:
    """``h=1:5`` (inclusive range) or ``nodes=100,200,400``."""
    param, sep, values = spec.partition("=")
    param = param.strip()
    if not sep or param not in _SWEEPABLE:
        raise UsageError(f"sweep must be PARAM=VALUES with PARAM in {sorted(_SWEEPABLE)}")
    conv = _SWEEPABLE[param]
    values = values.strip()
    if not values:
        raise UsageError("empty sweep")
    try:
        if ":" in values and conv is int:
            lo, hi = (int(x) for x in values.split(":"))
            out = list(range(lo, hi + 1))
        else:
            out = [conv(x) for x in values.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad sweep values {values!r}") from exc
    if not out:
        raise UsageError("empty sweep")
    return param, out


def cmd_bench(args, argv) -> int:
    param, values = parse_sweep(args.sweep)
    threads = _threads(args)
    seed = args.seed if args.seed is not None else 0
    base = _config(args)
    fixed = None
    if args.input or args.sparse_dir:
        if param in ("nodes", "graphs"):
            raise UsageError(f"cannot sweep {param} over a fixed dataset")
        fixed = _load(args)
    rows = ["param\tvalue\tgraphs\tnodes\tseconds"]
    for val in values:
        kw = {"K": base.K, "h": base.h, "lam": base.lam}
        n_graphs, n_nodes = args.graphs, args.nodes
        if param == "lambda":
            kw["lam"] = val
        elif param in ("h", "K"):
            kw[param] = val
        elif param == "nodes":
            n_nodes = val
        else:
            n_graphs = val
        config = KernelConfig(base.kind, normalize=base.normalize, **kw)
        ds = fixed or bounded_dataset(seed, n_graphs, n_nodes, args.max_degree, args.labels)
        best = float("inf")
        for _ in range(max(1, args.repeat)):
            gc.collect()
            best = min(best, gram(ds, config, threads).wall_time)
        total_nodes = sum(g.node_count for g in ds.graphs)
        rows.append(f"{param}\t{val}\t{len(ds)}\t{total_nodes}\t{best:.6f}")
    text = "\n".join(rows) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write(args.out, text)
        m = _manifest(args, argv, base, threads)
        m.seed = seed
        m.outputs = [args.out]
        m.write(args.out + ".manifest.json")
    return 0


def _counterexample(ds: Dataset, what: str) -> str:
    buf = io.StringIO()
    write_gtx(ds, buf)
    return f"counterexample ({what}):\n{buf.getvalue()}"


def cmd_verify(args, argv) -> int:
    """Oracle-equivalence checks on seeded random graphs; stops at the first mismatch."""
    try:
        lambdas = [float(x) for x in args.lambdas.split(",")]
    except ValueError as exc:
        raise UsageError("--lambdas must be comma-separated floats") from exc
    if args.max_nodes < 1 or args.r < 1 or args.trials < 0:
        raise UsageError("--max-nodes, --r must be >= 1 and --trials >= 0")
    rng = random.Random(args.seed)
    checks = 0
    for t in range(args.trials):
        ds = random_dataset(rng.randrange(2**31), 2, args.max_nodes)
        ga, gb = ds.graphs
        for r in range(1, args.r + 1):
            # shortest-path multiplicities
            for v in range(ga.node_count):
                dag = extract_dag(ga, v, r)
                for u, m in dag.multiplicities().items():
                    want = oracle.count_shortest_paths(ga.adjacency, v, u)
                    checks += 1
                    if m != want:
                        print(f"FAIL multiplicity root={v} node={u} r={r}: {m} != {want}")
                        print(_counterexample(Dataset((ga,), ds.label_interner), "multiplicity"))
                        return 1
            interner = Interner()
            ra = wl_iterate(ga, "dag", r, 0, interner)[0]
            rb = wl_iterate(gb, "dag", r, 0, interner)[0]
            got = delta_base_kernel(ra, rb)
            want = oracle.naive_delta_kernel(ga.node_labels, gb.node_labels)
            checks += 1
            if got != want:
                print(f"FAIL delta kernel r={r}: {got} != {want}")
                print(_counterexample(ds, "delta"))
                return 1
            for lam in lambdas:
                got = st_base_kernel(ra, rb, r, lam)
                want = oracle.naive_st_graph_kernel(
                    ga.adjacency, ga.node_labels, gb.adjacency, gb.node_labels, r, lam
                )
                checks += 1
                if abs(got - want) > 1e-9 * max(1.0, abs(want)):
                    print(f"FAIL st kernel r={r} lambda={lam}: {got!r} != {want!r}")
                    print(_counterexample(ds, "st"))
                    return 1
    print(f"ok: {checks} checks over {args.trials} trials")
    return 0


_COMMANDS = {
    "gram": cmd_gram,
    "features": cmd_features,
    "wl-test": cmd_wl_test,
    "bench": cmd_bench,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return _COMMANDS[args.command](args, argv)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
