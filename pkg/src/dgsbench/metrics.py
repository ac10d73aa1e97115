"""Latency/throughput accounting and report serialization.

Percentiles use the nearest-rank rule on sorted samples: the p-th
percentile of n samples is element ceil(p/100 * n), 1-indexed.  Latency
is sampled once per window of micro-ops, not per op, so harness overhead
stays out of the measured path.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field

from .errors import WorkloadMismatchError

CSV_HEADER = "class,ops,seconds,throughput,p50,p95,p99,max,mean"


def latency_percentile(samples, p: float) -> float:
    """Nearest-rank percentile; samples need not be pre-sorted."""
    if not samples:
        raise ValueError("no samples")
    if not (0 < p <= 100):
        raise ValueError("percentile out of range")
    s = sorted(samples)
    rank = max(1, math.ceil(p / 100.0 * len(s)))
    return s[rank - 1]


@dataclass
class ClassStats:
    """Aggregate stats for one op class (insert / search / scan / ...)."""

    ops: int = 0
    seconds: float = 0.0
    samples: list = field(default_factory=list)  # per-window latency, seconds

    @property
    def throughput(self) -> float:
        return self.ops / self.seconds if self.seconds > 0 else 0.0

    def percentile(self, p: float) -> float:
        return latency_percentile(self.samples, p) if self.samples else 0.0

    @property
    def mean_latency(self) -> float:
        return sum(self.samples) / len(self.samples) if self.samples else 0.0

    @property
    def max_latency(self) -> float:
        return max(self.samples) if self.samples else 0.0

    def merge(self, other: "ClassStats") -> None:
        # threads run a class concurrently: wall time is the max, not the sum
        self.ops += other.ops
        self.seconds = max(self.seconds, other.seconds)
        self.samples.extend(other.samples)

    def row(self, name: str) -> str:
        return ",".join(
            [
                name,
                str(self.ops),
                f"{self.seconds:.6f}",
                f"{self.throughput:.2f}",
                f"{self.percentile(50):.9f}",
                f"{self.percentile(95):.9f}",
                f"{self.percentile(99):.9f}",
                f"{self.max_latency:.9f}",
                f"{self.mean_latency:.9f}",
            ]
        )


@dataclass
class MetricsReport:
    config: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)  # name -> ClassStats
    memory: dict = field(default_factory=dict)
    valid: bool = True
    outcome_digest: str = ""
    errors: list = field(default_factory=list)

    def stats(self, name: str) -> ClassStats:
        return self.classes.setdefault(name, ClassStats())

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for name in sorted(self.classes):
            lines.append(self.classes[name].row(name))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "config": self.config,
            "valid": self.valid,
            "outcome_digest": self.outcome_digest,
            "errors": list(self.errors),
            "memory": self.memory,
            "classes": {
                name: {
                    "ops": st.ops,
                    "seconds": st.seconds,
                    "throughput": st.throughput,
                    "p50": st.percentile(50),
                    "p95": st.percentile(95),
                    "p99": st.percentile(99),
                    "max": st.max_latency,
                    "mean": st.mean_latency,
                }
                for name, st in sorted(self.classes.items())
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def outcome_digest(parts) -> str:
    """SHA-256 over the logical outcomes of a run (search hits, scan
    sums, final counts); byte-identical across replays of the same seed."""
    h = hashlib.sha256()
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x00")
    return h.hexdigest()


def cost_breakdown(with_cc: MetricsReport, no_cc: MetricsReport) -> dict:
    """Per-class concurrency-control amplification.

    For each op class present in both reports, amplification is the
    no-CC throughput divided by the with-CC throughput (1.0 means CC is
    free), and t_cc_share is the fraction of with-CC wall time not
    explained by the no-CC rate.  Op counts must match exactly.
    """
    out = {}
    for name in sorted(set(with_cc.classes) & set(no_cc.classes)):
        a, b = with_cc.classes[name], no_cc.classes[name]
        if a.ops != b.ops:
            raise WorkloadMismatchError(
                f"class {name}: {a.ops} ops with CC vs {b.ops} without"
            )
        if a.ops == 0 or a.throughput == 0 or b.throughput == 0:
            continue
        amp = b.throughput / a.throughput
        ideal = a.ops / b.throughput
        share = max(0.0, (a.seconds - ideal) / a.seconds) if a.seconds > 0 else 0.0
        out[name] = {"amplification": amp, "t_cc_share": share}
    return out


def memory_account(graph) -> dict:
    """Structural word counts from the graph plus best-effort process RSS."""
    prof = dict(graph.memory_profile())
    rss = _rss_bytes()
    if rss is not None:
        prof["rss_bytes"] = rss
    return prof


def _rss_bytes():
    try:
        with open("/proc/self/status", "r", encoding="ascii") as f:
            for line in f:
                if line.startswith("VmRSS:"):
                    return int(line.split()[1]) * 1024
    except OSError:
        pass
    return None


class Stopwatch:
    """Monotonic timer for measured phases."""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
        return False
