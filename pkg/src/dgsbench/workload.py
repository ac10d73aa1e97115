"""Deterministic workload generation and the two text file formats.

Edge lists are UTF-8 text, one `u v [w]` per line with single spaces;
lines starting with `#` are comments.  With `timestamped=True` each line
carries a leading integer timestamp column that fixes stream order (no
shuffling).  Op streams hold one record per line: `I u v`, `D u v`,
`S u v`, `N u`, `V u`.

Every generator is a pure function of its inputs and a 64-bit seed, using
the documented SplitMix64 generator, so replays are byte-identical across
runs and machines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError, WorkloadMismatchError
from .rng import SplitMix64

SYNTHETIC_ID_SPACE = 1 << 22  # element ids are uniform over [0, 2^22)


@dataclass(frozen=True)
class OpRecord:
    code: str  # I: insert edge, D: delete edge, S: search edge, N: insert vertex, V: scan neighbors
    u: int
    v: int | None = None
    w: int | None = None

    def line(self) -> str:
        if self.code in ("I", "D", "S"):
            return f"{self.code} {self.u} {self.v}"
        return f"{self.code} {self.u}"


@dataclass
class WorkloadSpec:
    """A complete micro-benchmark input: initial graph + op streams."""

    initial_edges: list[tuple] = field(default_factory=list)
    insert_ops: list[OpRecord] = field(default_factory=list)
    search_ops: list[OpRecord] = field(default_factory=list)
    scan_ops: list[OpRecord] = field(default_factory=list)
    seed: int = 0
    directed: bool = True


# -- file formats ---------------------------------------------------------


def load_edge_list(path, timestamped: bool = False) -> list[tuple]:
    """Returns (u, v) or (u, v, w) tuples.  Timestamped inputs are sorted
    by the leading timestamp column (stable), which then replaces
    shuffling in split_insert_stream."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            want = 2 + (1 if timestamped else 0)
            if len(parts) < want or len(parts) > want + 1:
                raise ConfigError(f"{path}:{lineno}: malformed edge line: {line!r}")
            try:
                nums = [int(p) for p in parts]
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: non-integer field: {line!r}") from e
            if timestamped:
                ts, rest = nums[0], nums[1:]
            else:
                ts, rest = None, nums
            if len(rest) == 3 and rest[2] < 0:
                raise ConfigError(f"{path}:{lineno}: negative weight rejected")
            if rest[0] < 0 or rest[1] < 0:
                raise ConfigError(f"{path}:{lineno}: negative vertex id")
            rows.append((ts, tuple(rest)))
    if timestamped:
        rows.sort(key=lambda r: r[0])
    return [edge for _ts, edge in rows]


def write_edge_list(path, edges, comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        if comment:
            f.write(f"# {comment}\n")
        for e in edges:
            f.write(" ".join(str(x) for x in e) + "\n")


def load_op_stream(path) -> list[OpRecord]:
    ops = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            code = parts[0]
            try:
                if code in ("I", "D", "S") and len(parts) == 3:
                    ops.append(OpRecord(code, int(parts[1]), int(parts[2])))
                elif code in ("N", "V") and len(parts) == 2:
                    ops.append(OpRecord(code, int(parts[1])))
                else:
                    raise ConfigError(f"{path}:{lineno}: malformed op line: {line!r}")
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: non-integer field: {line!r}") from e
    return ops


def write_op_stream(path, ops) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for op in ops:
            f.write(op.line() + "\n")


# -- derivation helpers ------------------------------------------------------


def expand_undirected(edges) -> list[tuple]:
    """Store each undirected edge in both directions (self-loops once)."""
    out = []
    for e in edges:
        u, v = e[0], e[1]
        rest = tuple(e[2:])
        out.append((u, v) + rest)
        if u != v:
            out.append((v, u) + rest)
    return out


def degrees_from_edges(edges) -> dict[int, int]:
    """Out-degree per vertex over distinct edges; targets materialize at 0."""
    adj: dict[int, set[int]] = {}
    verts: set[int] = set()
    for e in edges:
        u, v = e[0], e[1]
        adj.setdefault(u, set()).add(v)
        verts.add(u)
        verts.add(v)
    return {u: len(adj.get(u, ())) for u in verts}


# -- generators ---------------------------------------------------------------


def split_insert_stream(edges, seed: int, timestamped: bool = False):
    """80/20 split: first floor(0.8 m) edges load the initial graph, the rest
    become the insert stream.  Order is a seeded shuffle unless the input
    carried timestamps (then the given order is already the stream order)."""
    edges = list(edges)
    if not timestamped:
        SplitMix64(seed).shuffle(edges)
    cut = (len(edges) * 8) // 10
    return edges[:cut], edges[cut:]


def gen_search_stream(edges, seed: int) -> list[OpRecord]:
    """floor(0.2 m) search targets drawn without replacement from the edge set."""
    edges = list(edges)
    m = len(edges)
    k = (m * 2) // 10
    rng = SplitMix64(seed ^ 0x5EA4C8)
    picks = rng.sample_indices(m, k)
    return [OpRecord("S", edges[i][0], edges[i][1]) for i in picks]


def gen_scan_stream(degrees: dict[int, int], seed: int, degree_weighted: bool = False) -> list[OpRecord]:
    """Scan targets: the top floor(0.2 |V|) vertices by degree (ties to the
    lower id), order shuffled by seed.  With degree_weighted, targets are
    instead sampled without replacement with probability proportional to
    degree."""
    verts = sorted(degrees)
    k = (len(verts) * 2) // 10
    rng = SplitMix64(seed ^ 0x5CA11)
    if k == 0:
        return []
    if degree_weighted:
        pool = list(verts)
        weights = [max(degrees[v], 0) for v in pool]
        chosen = []
        for _ in range(k):
            total = sum(weights)
            if total <= 0:
                break
            x = rng.randbelow(total)
            acc = 0
            for i, wt in enumerate(weights):
                acc += wt
                if x < acc:
                    chosen.append(pool.pop(i))
                    weights.pop(i)
                    break
        targets = chosen
    else:
        ranked = sorted(verts, key=lambda v: (-degrees[v], v))
        targets = ranked[:k]
        rng.shuffle(targets)
    return [OpRecord("V", u) for u in targets]


def gen_synthetic(set_size: int, total_bytes: int, word_bytes: int = 8, seed: int = 0) -> list[list[int]]:
    """x = total_bytes // (set_size * word_bytes) sets, each holding
    set_size distinct ids uniform over [0, 2^22).  Set i models N(i)."""
    if set_size < 1:
        raise ConfigError("set_size must be positive")
    if total_bytes < set_size * word_bytes:
        raise ConfigError("total_bytes smaller than one set")
    x = total_bytes // (set_size * word_bytes)
    rng = SplitMix64(seed)
    sets: list[list[int]] = []
    for _ in range(x):
        s: set[int] = set()
        while len(s) < set_size:
            s.add(rng.randbelow(SYNTHETIC_ID_SPACE))
        sets.append(sorted(s))
    return sets


def synthetic_edges(sets) -> list[tuple[int, int]]:
    """Flatten synthetic sets into (set_id, element) edges."""
    return [(sid, e) for sid, members in enumerate(sets) for e in members]


def build_workload(edges, seed: int, directed: bool = True, timestamped: bool = False,
                   degree_weighted: bool = False) -> WorkloadSpec:
    """The full micro pipeline: expand (if undirected), split 80/20, then
    derive search and scan streams from the complete edge set."""
    edges = list(edges)
    if not directed:
        edges = expand_undirected(edges)
    initial, inserts = split_insert_stream(edges, seed, timestamped)
    search_ops = gen_search_stream(edges, seed)
    scan_ops = gen_scan_stream(degrees_from_edges(edges), seed, degree_weighted)
    insert_ops = [
        OpRecord("I", e[0], e[1], e[2] if len(e) > 2 else None) for e in inserts
    ]
    return WorkloadSpec(
        initial_edges=initial,
        insert_ops=insert_ops,
        search_ops=search_ops,
        scan_ops=scan_ops,
        seed=seed,
        directed=directed,
    )


def check_stream_validity(spec: WorkloadSpec) -> None:
    """Every search target must exist in initial or insert stream; every scan
    target vertex must exist.  Raises WorkloadMismatchError otherwise."""
    known = {(e[0], e[1]) for e in spec.initial_edges}
    known.update((op.u, op.v) for op in spec.insert_ops)
    for op in spec.search_ops:
        if (op.u, op.v) not in known:
            raise WorkloadMismatchError(f"search target ({op.u}, {op.v}) never inserted")
    verts = {u for (u, v) in known} | {v for (u, v) in known}
    for op in spec.scan_ops:
        if op.u not in verts:
            raise WorkloadMismatchError(f"scan target vertex {op.u} never materialized")
