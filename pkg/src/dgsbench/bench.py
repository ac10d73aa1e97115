"""Multi-threaded benchmark executor.

One worker thread per stream.  Workers line up on a barrier, execute
their slice of the op stream, and record one latency sample per window
of micro-ops (default 100).  All counters are thread-local and merged
after the join, so metric collection never contends with the measured
path.  A worker exception aborts the run: the report is flagged invalid
and the CLI maps that to a nonzero exit.
"""

from __future__ import annotations

import threading
from dataclasses import asdict, dataclass, field
from time import perf_counter

from .errors import ConfigError
from .graph import CC_MODES, GraphConfig, build_graph
from .metrics import ClassStats, MetricsReport, memory_account, outcome_digest
from .workload import OpRecord, WorkloadSpec, build_workload, load_edge_list


@dataclass
class BenchConfig:
    container: str = "sorted"
    cc: str = "fine"
    block_size: int = 256
    adaptive_threshold: int = 256
    threads: int = 1
    readers: int = 0
    writers: int = 0
    batch_size: int = 1
    seed: int = 0
    window: int = 100
    vertex_index: str = "dense"
    mixed_ops: int = 2000  # per-worker op budget in mixed mode

    def graph_config(self) -> GraphConfig:
        return GraphConfig(
            container=self.container,
            cc=self.cc,
            block_size=self.block_size,
            adaptive_threshold=self.adaptive_threshold,
            vertex_index=self.vertex_index,
            seed=self.seed,
        )

    def echo(self) -> dict:
        return asdict(self)


def _chunks(seq, k: int) -> list:
    """At most k contiguous, near-equal slices; empties dropped."""
    n = len(seq)
    k = max(1, k)
    base, extra = divmod(n, k)
    out, pos = [], 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        if size:
            out.append(seq[pos:pos + size])
        pos += size
    return out


class _Window:
    """Latency sampler: one duration per `window` completed micro-ops."""

    __slots__ = ("window", "samples", "_count", "_start")

    def __init__(self, window: int):
        self.window = max(1, window)
        self.samples: list[float] = []
        self._count = 0
        self._start = perf_counter()

    def tick(self, n: int = 1) -> None:
        self._count += n
        if self._count >= self.window:
            now = perf_counter()
            full, self._count = divmod(self._count, self.window)
            per = (now - self._start) / full
            self.samples.extend([per] * full)
            self._start = now


def _write_worker(graph, ops, cfg: BenchConfig, stats: ClassStats, parts: list) -> None:
    win = _Window(cfg.window)
    t0 = perf_counter()
    if cfg.cc == "coarse":
        for i in range(0, len(ops), cfg.batch_size):
            batch = ops[i:i + cfg.batch_size]
            graph.apply_batch(batch)
            win.tick(len(batch))
    else:
        for i in range(0, len(ops), cfg.batch_size):
            batch = ops[i:i + cfg.batch_size]
            # begin_write(ops=...) both declares the lock set and applies
            graph.begin_write(ops=batch).commit()
            win.tick(len(batch))
    stats.seconds = perf_counter() - t0
    stats.ops = len(ops)
    stats.samples = win.samples
    parts.append(("w", len(ops)))


def _read_worker(graph, ops, cfg: BenchConfig, stats: ClassStats, parts: list) -> None:
    win = _Window(cfg.window)
    out = []
    txn = graph.begin_read()
    try:
        snap = getattr(txn, "snapshot", None)
        if snap is not None:
            snap.flatten()  # long read phase: skip the per-op tree descent
        t0 = perf_counter()
        for op in ops:
            if op.code == "S":
                out.append(1 if txn.search_edge(op.u, op.v) else 0)
            elif op.code == "V":
                ns = txn.scan_neighbors(op.u)
                out.append((op.u, len(ns), sum(ns)))
            else:
                out.append(txn.degree(op.u))
            win.tick()
        stats.seconds = perf_counter() - t0
    finally:
        txn.close()
    stats.ops = len(ops)
    stats.samples = win.samples
    parts.append(("r", out))


def _run_phase(graph, name: str, streams, worker, cfg: BenchConfig, report: MetricsReport,
               digest_parts: list) -> None:
    """One measured phase: a barrier start, one thread per stream, merged
    stats keyed by op class `name`."""
    if not streams:
        return
    slots = [(ClassStats(), []) for _ in streams]
    errors: list[str] = []
    barrier = threading.Barrier(len(streams))

    def run(i: int, ops) -> None:
        try:
            barrier.wait()
            worker(graph, ops, cfg, slots[i][0], slots[i][1])
        except Exception as e:  # executor isolation: flag, do not hang the run
            errors.append(f"{name} worker {i}: {type(e).__name__}: {e}")

    if len(streams) == 1:
        run(0, streams[0])
    else:
        threads = [
            threading.Thread(target=run, args=(i, ops), daemon=True)
            for i, ops in enumerate(streams)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    merged = report.stats(name)
    for st, parts in slots:
        merged.merge(st)
        digest_parts.append((name, parts))
    if errors:
        report.valid = False
        report.errors.extend(errors)


def run_benchmark(cfg: BenchConfig, spec: WorkloadSpec) -> MetricsReport:
    """Load the initial graph, then run insert / search / scan phases,
    each class measured on its own with `threads` workers."""
    if cfg.cc == "off" and cfg.threads > 1:
        # no locks at all in this mode: concurrent writers would race
        raise ConfigError("cc=off measures bare containers; it runs single-threaded")
    gcfg = cfg.graph_config()
    gcfg.validate()
    graph = build_graph(gcfg)
    report = MetricsReport(config=cfg.echo())
    digest_parts: list = []

    load_ops = [
        OpRecord("I", e[0], e[1], e[2] if len(e) > 2 else None)
        for e in spec.initial_edges
    ]
    _run_phase(graph, "load", _chunks(load_ops, cfg.threads), _write_worker,
               cfg, report, digest_parts)
    _run_phase(graph, "insert", _chunks(spec.insert_ops, cfg.threads), _write_worker,
               cfg, report, digest_parts)
    _run_phase(graph, "search", _chunks(spec.search_ops, cfg.threads), _read_worker,
               cfg, report, digest_parts)
    _run_phase(graph, "scan", _chunks(spec.scan_ops, cfg.threads), _read_worker,
               cfg, report, digest_parts)

    digest_parts.append(("final", graph.num_vertices(), graph.num_edges()))
    report.outcome_digest = outcome_digest(digest_parts)
    report.memory = memory_account(graph)
    return report


def run_mixed(cfg: BenchConfig, spec: WorkloadSpec) -> MetricsReport:
    """Concurrent readers and writers over one pre-loaded graph.

    `writers` threads replay the insert stream in round-robin slices
    while `readers` threads each run `mixed_ops` scans over the loaded
    vertex set.  Classes are reported as `writer` and `reader`.
    """
    if cfg.readers < 0 or cfg.writers < 0 or cfg.readers + cfg.writers == 0:
        raise ConfigError("mixed mode needs at least one reader or writer")
    if cfg.cc == "off":
        raise ConfigError("cc=off has no isolation; mixed readers and writers need fine or coarse")
    gcfg = cfg.graph_config()
    gcfg.validate()
    graph = build_graph(gcfg)
    report = MetricsReport(config=cfg.echo())
    digest_parts: list = []

    load_ops = [
        OpRecord("I", e[0], e[1], e[2] if len(e) > 2 else None)
        for e in spec.initial_edges
    ]
    _run_phase(graph, "load", _chunks(load_ops, cfg.threads), _write_worker,
               cfg, report, digest_parts)

    verts = sorted({e[0] for e in spec.initial_edges})
    if not verts:
        raise ConfigError("mixed mode needs a nonempty initial graph")
    scan_streams = []
    for r in range(cfg.readers):
        scan_streams.append([
            OpRecord("V", verts[(r * 7919 + i) % len(verts)])
            for i in range(cfg.mixed_ops)
        ])
    write_streams = _chunks(spec.insert_ops, cfg.writers) if cfg.writers else []

    streams = [("writer", ops, _write_worker) for ops in write_streams]
    streams += [("reader", ops, _read_worker) for ops in scan_streams]
    slots = [(ClassStats(), []) for _ in streams]
    errors: list[str] = []
    barrier = threading.Barrier(len(streams))

    def run(i: int) -> None:
        _name, ops, worker = streams[i]
        try:
            barrier.wait()
            worker(graph, ops, cfg, slots[i][0], slots[i][1])
        except Exception as e:
            errors.append(f"mixed worker {i}: {type(e).__name__}: {e}")

    threads = [threading.Thread(target=run, args=(i,), daemon=True) for i in range(len(streams))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for (name, _ops, _w), (st, parts) in zip(streams, slots):
        report.stats(name).merge(st)
        digest_parts.append((name, parts))
    if errors:
        report.valid = False
        report.errors.extend(errors)

    report.config["reader_count"] = cfg.readers
    report.config["writer_count"] = cfg.writers
    digest_parts.append(("final", graph.num_vertices(), graph.num_edges()))
    report.outcome_digest = outcome_digest(digest_parts)
    report.memory = memory_account(graph)
    return report


def bench_from_files(cfg: BenchConfig, input_path, directed: bool = True,
                     timestamped: bool = False, degree_weighted: bool = False,
                     mixed: bool = False) -> MetricsReport:
    edges = load_edge_list(input_path, timestamped=timestamped)
    spec = build_workload(edges, cfg.seed, directed=directed,
                          timestamped=timestamped, degree_weighted=degree_weighted)
    if mixed or (cfg.readers + cfg.writers) > 0:
        return run_mixed(cfg, spec)
    return run_benchmark(cfg, spec)
