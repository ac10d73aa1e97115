"""Benchmark harness wiring and the command-line front end."""

from __future__ import annotations

import json
import os

import pytest

from dgsbench.bench import BenchConfig, _Window, _chunks, run_benchmark, run_mixed
from dgsbench.cli import main
from dgsbench.errors import ConfigError
from dgsbench.metrics import CSV_HEADER
from dgsbench.rng import SplitMix64
from dgsbench.workload import (
    OpRecord,
    WorkloadSpec,
    build_workload,
    load_edge_list,
    load_op_stream,
    write_edge_list,
)


def _edges(n_edges: int = 60, n_verts: int = 15, seed: int = 7) -> list[tuple]:
    rng = SplitMix64(seed)
    seen: set[tuple] = set()
    out = []
    while len(out) < n_edges:
        u, v = rng.randbelow(n_verts), rng.randbelow(n_verts)
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        out.append((u, v))
    return out


@pytest.fixture
def edge_file(tmp_path):
    edges = _edges()
    path = tmp_path / "edges.txt"
    write_edge_list(path, edges)
    return str(path), edges


class TestBenchConfig:
    def test_graph_config_mapping(self):
        cfg = BenchConfig(container="pma", cc="off", block_size=64,
                          adaptive_threshold=9, vertex_index="hash", seed=5)
        g = cfg.graph_config()
        assert (g.container, g.cc, g.block_size) == ("pma", "off", 64)
        assert (g.adaptive_threshold, g.vertex_index, g.seed) == (9, "hash", 5)

    def test_echo_covers_every_field(self):
        echo = BenchConfig(threads=4, batch_size=32).echo()
        assert echo["threads"] == 4
        assert echo["batch_size"] == 32
        assert set(echo) >= {"container", "cc", "seed", "window", "readers", "writers"}


class TestChunks:
    def test_near_equal_contiguous(self):
        out = _chunks(list(range(10)), 3)
        assert out == [[0, 1, 2, 3], [4, 5, 6], [7, 8, 9]]

    def test_concatenation_preserves_order(self):
        seq = list(range(23))
        out = _chunks(seq, 5)
        assert [x for c in out for x in c] == seq

    def test_more_workers_than_items(self):
        assert _chunks([1, 2], 5) == [[1], [2]]

    def test_empty_input(self):
        assert _chunks([], 3) == []

    def test_zero_workers_clamps_to_one(self):
        assert _chunks([1, 2, 3], 0) == [[1, 2, 3]]


class TestWindow:
    def test_one_sample_per_window(self):
        w = _Window(10)
        for _ in range(100):
            w.tick()
        assert len(w.samples) == 10

    def test_bulk_ticks_emit_full_windows(self):
        w = _Window(10)
        w.tick(25)
        assert len(w.samples) == 2
        w.tick(25)
        assert len(w.samples) == 5

    def test_window_clamps_to_one(self):
        w = _Window(0)
        w.tick()
        assert len(w.samples) == 1


class TestRunBenchmark:
    def test_phases_and_shape(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=3)
        cfg = BenchConfig(container="sorted", cc="fine", seed=3)
        rep = run_benchmark(cfg, spec)
        assert rep.valid and not rep.errors
        assert set(rep.classes) == {"load", "insert", "search", "scan"}
        assert rep.classes["load"].ops == len(spec.initial_edges)
        assert rep.classes["insert"].ops == len(spec.insert_ops)
        assert rep.classes["search"].ops == len(spec.search_ops)
        assert rep.classes["scan"].ops == len(spec.scan_ops)
        assert rep.config == cfg.echo()
        assert rep.memory["payload_words"] > 0
        assert len(rep.outcome_digest) == 64

    def test_single_thread_replay_is_byte_identical(self, edge_file):
        _path, edges = edge_file
        digests = []
        for _ in range(2):
            spec = build_workload(edges, seed=11)
            rep = run_benchmark(BenchConfig(container="pma", cc="fine", seed=11), spec)
            digests.append(rep.outcome_digest)
        assert digests[0] == digests[1]

    def test_threaded_replay_is_byte_identical(self, edge_file):
        # phases are barrier-separated and chunking is positional, so the
        # logical outcome never depends on the interleave
        _path, edges = edge_file
        digests = []
        for _ in range(2):
            spec = build_workload(edges, seed=2)
            rep = run_benchmark(
                BenchConfig(container="sorted", cc="fine", threads=4, seed=2), spec
            )
            assert rep.valid
            digests.append(rep.outcome_digest)
        assert digests[0] == digests[1]

    def test_coarse_batches(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=5)
        cfg = BenchConfig(container="cow", cc="coarse", batch_size=8, threads=2, seed=5)
        rep = run_benchmark(cfg, spec)
        assert rep.valid
        assert rep.classes["insert"].ops == len(spec.insert_ops)

    def test_off_mode_single_threaded_only(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=0)
        rep = run_benchmark(BenchConfig(container="unsorted", cc="off"), spec)
        assert rep.valid
        with pytest.raises(ConfigError):
            run_benchmark(BenchConfig(cc="off", threads=2), spec)

    def test_worker_failure_flags_report(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=1)
        spec.insert_ops = [OpRecord("I", 2, -5)]  # negative id rejected downstream
        rep = run_benchmark(BenchConfig(container="sorted", cc="fine"), spec)
        assert not rep.valid
        assert any("insert worker 0" in e for e in rep.errors)


class TestRunMixed:
    def test_reader_and_writer_classes(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=4)
        cfg = BenchConfig(container="sorted", cc="fine", readers=2, writers=2,
                          mixed_ops=200, seed=4)
        rep = run_mixed(cfg, spec)
        assert rep.valid and not rep.errors
        assert {"load", "reader", "writer"} <= set(rep.classes)
        assert rep.classes["reader"].ops == 2 * 200
        assert rep.classes["writer"].ops == len(spec.insert_ops)
        assert rep.config["reader_count"] == 2
        assert rep.config["writer_count"] == 2

    def test_readers_only(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=4)
        cfg = BenchConfig(container="cow", cc="coarse", readers=3, mixed_ops=50)
        rep = run_mixed(cfg, spec)
        assert rep.valid
        assert rep.classes["reader"].ops == 150
        assert "writer" not in rep.classes

    def test_needs_a_participant(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=0)
        with pytest.raises(ConfigError):
            run_mixed(BenchConfig(readers=0, writers=0), spec)

    def test_off_mode_rejected(self, edge_file):
        _path, edges = edge_file
        spec = build_workload(edges, seed=0)
        with pytest.raises(ConfigError):
            run_mixed(BenchConfig(cc="off", readers=1), spec)

    def test_needs_initial_edges(self):
        with pytest.raises(ConfigError):
            run_mixed(BenchConfig(readers=1), WorkloadSpec())


class TestCliGenerate:
    def test_stream_files(self, edge_file, tmp_path, capsys):
        path, edges = edge_file
        prefix = str(tmp_path / "wl")
        assert main(["generate", "--input", path, "--out", prefix, "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "initial=48 inserts=12 searches=12" in out
        assert len(load_edge_list(prefix + ".initial")) == 48
        assert len(load_op_stream(prefix + ".inserts")) == 12
        assert len(load_op_stream(prefix + ".search")) == 12
        assert len(load_op_stream(prefix + ".scan")) > 0

    def test_synthetic_edge_list(self, tmp_path, capsys):
        out_path = str(tmp_path / "syn.txt")
        rc = main(["generate", "--synthetic", "--out", out_path,
                   "--set-size", "4", "--total-bytes", str(16 * 4 * 8)])
        assert rc == 0
        assert "wrote 64 edges (16 sets)" in capsys.readouterr().out
        assert len(load_edge_list(out_path)) == 64

    def test_needs_input_unless_synthetic(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--out", str(tmp_path / "x")])
        assert exc.value.code == 2


class TestCliBench:
    def test_csv_to_stdout(self, edge_file, capsys):
        path, _edges = edge_file
        assert main(["bench", "--input", path, "--seed", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == CSV_HEADER
        assert [ln.split(",")[0] for ln in lines[1:]] == [
            "insert", "load", "scan", "search",
        ]

    def test_report_files(self, edge_file, tmp_path, capsys):
        path, _edges = edge_file
        prefix = str(tmp_path / "rep")
        rc = main(["bench", "--input", path, "--container", "segsl",
                   "--threads", "2", "--out", prefix])
        assert rc == 0
        assert "wrote" in capsys.readouterr().out
        with open(prefix + ".csv", encoding="utf-8") as f:
            assert f.readline().strip() == CSV_HEADER
        with open(prefix + ".json", encoding="utf-8") as f:
            doc = json.load(f)
        assert doc["config"]["container"] == "segsl"
        assert doc["config"]["threads"] == 2
        assert doc["valid"] is True

    def test_mixed_mode_flags(self, edge_file, capsys):
        path, _edges = edge_file
        rc = main(["bench", "--input", path, "--readers", "1", "--writers", "1"])
        assert rc == 0
        names = {ln.split(",")[0] for ln in capsys.readouterr().out.splitlines()[1:]}
        assert {"reader", "writer"} <= names

    def test_bad_combo_exits_2(self, edge_file, capsys):
        path, _edges = edge_file
        assert main(["bench", "--input", path, "--cc", "coarse"]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_off_mode_thread_guard_exits_2(self, edge_file):
        path, _edges = edge_file
        assert main(["bench", "--input", path, "--cc", "off", "--threads", "2"]) == 2

    def test_missing_input_exits_2(self, tmp_path, capsys):
        assert main(["bench", "--input", str(tmp_path / "absent.txt")]) == 2
        assert "missing file" in capsys.readouterr().err

    def test_unknown_container_rejected_by_parser(self, edge_file):
        path, _edges = edge_file
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--input", path, "--container", "btree"])
        assert exc.value.code == 2


class TestCliAnalytics:
    def test_pagerank_verified_against_static(self, edge_file, capsys):
        path, _edges = edge_file
        rc = main(["analytics", "--input", path, "--undirected",
                   "--kernel", "pr", "--verify"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.startswith("vertex,value\n")
        assert "verified against the static baseline" in out

    def test_bfs_rows(self, edge_file, capsys):
        path, _edges = edge_file
        rc = main(["analytics", "--input", path, "--kernel", "bfs", "--source", "0"])
        assert rc == 0
        rows = dict(
            ln.split(",") for ln in capsys.readouterr().out.splitlines()[1:]
        )
        assert rows["0"] == "0"

    def test_triangle_count_scalar_row(self, tmp_path, capsys):
        path = tmp_path / "tri.txt"
        write_edge_list(path, [(0, 1), (1, 2), (0, 2)])
        rc = main(["analytics", "--input", str(path), "--undirected",
                   "--kernel", "tc", "--verify"])
        assert rc == 0
        assert "total,1" in capsys.readouterr().out

    def test_triangles_refused_on_unsorted(self, edge_file, capsys):
        path, _edges = edge_file
        rc = main(["analytics", "--input", path, "--container", "unsorted",
                   "--kernel", "tc"])
        assert rc == 2
        assert "unsupported query" in capsys.readouterr().err

    def test_output_file(self, edge_file, tmp_path):
        path, _edges = edge_file
        out_path = str(tmp_path / "pr.csv")
        rc = main(["analytics", "--input", path, "--kernel", "wcc", "--out", out_path])
        assert rc == 0
        with open(out_path, encoding="utf-8") as f:
            assert f.readline().strip() == "vertex,value"


class TestCliVerify:
    def test_pass(self, edge_file, capsys):
        path, _edges = edge_file
        rc = main(["verify", "--input", path, "--container", "pma"])
        assert rc == 0
        assert "PASS" in capsys.readouterr().out

    def test_pass_with_extra_ops(self, edge_file, tmp_path, capsys):
        path, _edges = edge_file
        ops_path = str(tmp_path / "extra.ops")
        with open(ops_path, "w", encoding="utf-8") as f:
            f.write("I 1 9\nD 1 9\nN 40\nI 2 11\n")
        rc = main(["verify", "--input", path, "--ops", ops_path,
                   "--container", "unsorted"])
        assert rc == 0
        assert "PASS" in capsys.readouterr().out

    def test_fail_maps_to_exit_1(self, edge_file, capsys, monkeypatch):
        path, _edges = edge_file
        monkeypatch.setattr(
            "dgsbench.cli.oracle_check",
            lambda *a, **kw: (False, {"kind": "vertex-set"}),
        )
        assert main(["verify", "--input", path]) == 1
        assert "FAIL" in capsys.readouterr().err


class TestCliMemory:
    def test_breakdown_includes_csr_baseline(self, edge_file, capsys):
        path, _edges = edge_file
        assert main(["memory", "--input", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["payload_words"] > 0
        assert doc["csr_words"] > 0
