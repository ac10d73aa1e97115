"""Command-line entry point.

Subcommands:
  generate   derive benchmark streams (or a synthetic edge list) from inputs
  bench      run the multi-threaded micro-benchmark, write CSV + JSON
  analytics  run a kernel over a dynamic graph, optionally diff vs static
  verify     replay a workload and audit the result against the reference model
  memory     load a graph and print the structural memory breakdown

Exit codes: 0 success, 1 verification or run failure, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

from .analytics import KERNELS, DynamicView, result_rows
from .bench import BenchConfig, bench_from_files
from .errors import ConfigError, UnsupportedQueryError
from .graph import CC_MODES, GraphConfig, build_graph
from .metrics import memory_account
from .reference import ReferenceModel, oracle_check
from .static import csr_build
from .workload import (
    OpRecord,
    build_workload,
    gen_synthetic,
    load_edge_list,
    load_op_stream,
    synthetic_edges,
    write_edge_list,
    write_op_stream,
)

CONTAINERS = ("unsorted", "sorted", "pma", "segsl", "cow")


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--container", choices=CONTAINERS, default="sorted")
    p.add_argument("--cc", choices=CC_MODES, default="fine")
    p.add_argument("--block-size", type=int, default=256)
    p.add_argument("--adaptive-threshold", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="edge list file: u v [w]")
    p.add_argument("--timestamped", action="store_true",
                   help="input lines carry a leading timestamp column")
    p.add_argument("--undirected", action="store_true",
                   help="store each edge in both directions")


def _load_graph(args, edges):
    cfg = GraphConfig(
        container=args.container,
        cc=args.cc,
        block_size=args.block_size,
        adaptive_threshold=args.adaptive_threshold,
        seed=args.seed,
    )
    cfg.validate()
    g = build_graph(cfg)
    batch = 1024
    ops = [OpRecord("I", e[0], e[1], e[2] if len(e) > 2 else None) for e in edges]
    for i in range(0, len(ops), batch):
        g.apply_ops(ops[i:i + batch])
    return g


def _expand(args, edges):
    if args.undirected:
        from .workload import expand_undirected

        return expand_undirected(edges)
    return edges


def cmd_generate(args) -> int:
    if args.synthetic:
        sets = gen_synthetic(args.set_size, args.total_bytes, seed=args.seed)
        edges = synthetic_edges(sets)
        write_edge_list(args.out, edges, comment=f"synthetic set_size={args.set_size}")
        print(f"wrote {len(edges)} edges ({len(sets)} sets) to {args.out}")
        return 0
    edges = _expand(args, load_edge_list(args.input, timestamped=args.timestamped))
    spec = build_workload(edges, args.seed, timestamped=args.timestamped,
                          degree_weighted=args.degree_weighted)
    write_edge_list(args.out + ".initial", spec.initial_edges, comment="initial load")
    write_op_stream(args.out + ".inserts", spec.insert_ops)
    write_op_stream(args.out + ".search", spec.search_ops)
    write_op_stream(args.out + ".scan", spec.scan_ops)
    if not spec.search_ops:
        print("warning: edge count too small for a search stream", file=sys.stderr)
    print(
        f"initial={len(spec.initial_edges)} inserts={len(spec.insert_ops)} "
        f"searches={len(spec.search_ops)} scans={len(spec.scan_ops)}"
    )
    return 0


def cmd_bench(args) -> int:
    cfg = BenchConfig(
        container=args.container,
        cc=args.cc,
        block_size=args.block_size,
        adaptive_threshold=args.adaptive_threshold,
        threads=args.threads,
        readers=args.readers,
        writers=args.writers,
        batch_size=args.batch_size,
        seed=args.seed,
        window=args.window,
    )
    report = bench_from_files(
        cfg,
        args.input,
        directed=not args.undirected,
        timestamped=args.timestamped,
        degree_weighted=args.degree_weighted,
        mixed=(args.readers + args.writers) > 0,
    )
    csv_text = report.to_csv()
    if args.out:
        with open(args.out + ".csv", "w", encoding="utf-8") as f:
            f.write(csv_text)
        with open(args.out + ".json", "w", encoding="utf-8") as f:
            f.write(report.to_json())
        print(f"wrote {args.out}.csv and {args.out}.json")
    else:
        sys.stdout.write(csv_text)
    if not report.valid:
        for err in report.errors:
            print(f"worker failure: {err}", file=sys.stderr)
        return 1
    return 0


def cmd_analytics(args) -> int:
    edges = _expand(args, load_edge_list(args.input, timestamped=args.timestamped))
    kernel = KERNELS[args.kernel]
    g = _load_graph(args, edges)
    txn = g.begin_read()
    try:
        view = DynamicView(txn, g)
        if args.kernel in ("bfs", "sssp"):
            result = kernel(view, args.source)
        else:
            result = kernel(view)
    finally:
        txn.close()

    rows = result_rows(result)
    lines = ["vertex,value"] + [f"{u},{v}" for u, v in rows]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)

    if args.verify:
        ids = sorted({e[0] for e in edges} | {e[1] for e in edges})
        remap = {u: i for i, u in enumerate(ids)}
        csr = csr_build(
            [(remap[e[0]], remap[e[1]]) + tuple(e[2:]) for e in edges], len(ids)
        )
        if args.kernel in ("bfs", "sssp"):
            baseline = KERNELS[args.kernel](csr, remap[args.source])
        else:
            baseline = KERNELS[args.kernel](csr)
        base_rows = result_rows(baseline)
        if isinstance(result, dict):
            base_rows = [(ids[u], v) for u, v in base_rows]
        tol = 1e-9 if args.kernel == "pr" else 0
        for (u_a, v_a), (u_b, v_b) in zip(rows, base_rows):
            if u_a != u_b or abs(v_a - v_b) > tol:
                print(f"MISMATCH at {u_a}: dynamic={v_a} static={v_b}", file=sys.stderr)
                return 1
        if len(rows) != len(base_rows):
            print("MISMATCH: row counts differ", file=sys.stderr)
            return 1
        print("verified against the static baseline")
    return 0


def cmd_verify(args) -> int:
    edges = _expand(args, load_edge_list(args.input, timestamped=args.timestamped))
    g = _load_graph(args, edges)
    if args.ops:
        extra = load_op_stream(args.ops)
        batch = 256
        for i in range(0, len(extra), batch):
            g.apply_ops(extra[i:i + batch])
    model = ReferenceModel.from_log(g.op_log)
    order = "unsorted" if args.container == "unsorted" else "sorted"
    txn = g.begin_read()
    try:
        ok, divergence = oracle_check(txn, model, txn.ts, order=order)
    finally:
        txn.close()
    g.check_invariants()
    if ok:
        print(f"PASS: {g.num_vertices()} vertices, {g.num_edges()} edges match the reference model")
        return 0
    print(f"FAIL: {divergence}", file=sys.stderr)
    return 1


def cmd_memory(args) -> int:
    edges = _expand(args, load_edge_list(args.input, timestamped=args.timestamped))
    g = _load_graph(args, edges)
    acct = memory_account(g)
    ids = sorted({e[0] for e in edges} | {e[1] for e in edges})
    remap = {u: i for i, u in enumerate(ids)}
    csr = csr_build([(remap[e[0]], remap[e[1]]) for e in edges], len(ids))
    acct["csr_words"] = csr.memory_words()
    print(json.dumps(acct, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgsbench", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="derive benchmark streams or synthesize edges")
    g.add_argument("--input", help="edge list to split (omit with --synthetic)")
    g.add_argument("--out", required=True, help="output path or prefix")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--timestamped", action="store_true")
    g.add_argument("--undirected", action="store_true")
    g.add_argument("--degree-weighted", action="store_true",
                   help="sample scan targets by degree instead of top-degree ranking")
    g.add_argument("--synthetic", action="store_true",
                   help="emit a synthetic uniform edge list instead of splitting")
    g.add_argument("--set-size", type=int, default=512)
    g.add_argument("--total-bytes", type=int, default=64 * 1024 * 1024)
    g.set_defaults(fn=cmd_generate)

    b = sub.add_parser("bench", help="run the micro-benchmark")
    _add_graph_flags(b)
    _add_input_flags(b)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--readers", type=int, default=0,
                   help="mixed mode: concurrent reader threads")
    b.add_argument("--writers", type=int, default=0,
                   help="mixed mode: concurrent writer threads")
    b.add_argument("--batch-size", type=int, default=1)
    b.add_argument("--window", type=int, default=100,
                   help="micro-ops per latency sample")
    b.add_argument("--degree-weighted", action="store_true")
    b.add_argument("--out", help="report path prefix (.csv/.json appended)")
    b.set_defaults(fn=cmd_bench)

    a = sub.add_parser("analytics", help="run an analytics kernel")
    _add_graph_flags(a)
    _add_input_flags(a)
    a.add_argument("--kernel", choices=sorted(KERNELS), required=True)
    a.add_argument("--source", type=int, default=0, help="source vertex for bfs/sssp")
    a.add_argument("--verify", action="store_true",
                   help="diff the result against the CSR baseline")
    a.add_argument("--out", help="CSV output path (stdout otherwise)")
    a.set_defaults(fn=cmd_analytics)

    v = sub.add_parser("verify", help="audit a loaded graph against the reference model")
    _add_graph_flags(v)
    _add_input_flags(v)
    v.add_argument("--ops", help="optional op stream to apply after the load")
    v.set_defaults(fn=cmd_verify)

    m = sub.add_parser("memory", help="print the structural memory breakdown")
    _add_graph_flags(m)
    _add_input_flags(m)
    m.set_defaults(fn=cmd_memory)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "generate" and not args.synthetic and not args.input:
        ap.error("generate needs --input unless --synthetic is given")
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except UnsupportedQueryError as e:
        print(f"unsupported query: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"missing file: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
