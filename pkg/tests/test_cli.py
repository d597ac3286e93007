import csv
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from lcge.chimera import ChimeraGraph
from lcge.cli import (
    EXIT_INVALID,
    EXIT_OK,
    EXIT_OOM,
    EXIT_TIMEOUT,
    EXIT_USAGE,
    BenchReport,
    aggregate_path,
    instance_seed,
    main,
)
from lcge.instances import read_instance, read_solution, write_instance

DATA = Path(__file__).parent / "data"


def write_ideal(tmp_path, s, name="g.json"):
    path = tmp_path / name
    write_instance(ChimeraGraph.ideal(s), path)
    return path


class TestGenerate:
    def test_to_file(self, tmp_path):
        out = tmp_path / "g.json"
        assert main(["generate", "--size", "8", "--broken-ratio", "0.02", "--seed", "7", "--out", str(out)]) == 0
        g = read_instance(out)
        assert g.num_broken == 10
        data = json.loads(out.read_text())
        assert data["provenance"] == {"b": 0.02, "seed": 7}

    def test_to_stdout(self, capsys):
        assert main(["generate", "--size", "2", "--broken-ratio", "0"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["broken_horizontal"] == [] and data["broken_vertical"] == []

    def test_bad_ratio(self, capsys):
        assert main(["generate", "--size", "4", "--broken-ratio", "1.5"]) == EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_missing_size(self):
        assert main(["generate"]) == EXIT_USAGE


class TestSolve:
    def test_ideal(self, tmp_path):
        sol = tmp_path / "s.json"
        assert main(["solve", str(write_ideal(tmp_path, 4)), "--out", str(sol)]) == EXIT_OK
        rec = read_solution(sol)
        assert rec.result.objective == 16 and len(rec.embedding) == 16

    def test_timeout_exit_code(self, tmp_path):
        g = tmp_path / "g.json"
        main(["generate", "--size", "8", "--broken-ratio", "0.05", "--seed", "1", "--out", str(g)])
        sol = tmp_path / "s.json"
        assert main(["solve", str(g), "--timeout", "0.02", "--out", str(sol)]) == EXIT_TIMEOUT
        assert str(read_solution(sol).result.status) == "feasible_timeout"
        assert main(["verify", str(g), str(sol)]) == EXIT_OK

    def test_heuristic_flags(self, tmp_path):
        g = tmp_path / "g.json"
        main(["generate", "--size", "3", "--broken-ratio", "0.08", "--seed", "5", "--out", str(g)])
        objectives = {}
        for m in ("0", "0.25"):
            sol = tmp_path / f"s{m}.json"
            assert main(["solve", str(g), "--mode", "heuristic", "--max-rect-ratio", m, "--out", str(sol)]) == 0
            rec = read_solution(sol)
            assert rec.mode == "heuristic" and rec.m == float(m)
            objectives[m] = rec.result.objective
        assert objectives["0"] <= objectives["0.25"]
        assert main(["solve", str(g), "--mode", "heuristic"]) == EXIT_USAGE
        assert main(["solve", str(g), "--max-rect-ratio", "0.5"]) == EXIT_USAGE

    def test_missing_instance(self, tmp_path):
        assert main(["solve", str(tmp_path / "nope.json")]) == EXIT_USAGE
        assert main(["solve"]) == EXIT_USAGE

    def test_memory_cap_exit_code(self, tmp_path):
        g = tmp_path / "g.json"
        main(["generate", "--size", "8", "--broken-ratio", "0.05", "--seed", "1", "--out", str(g)])
        sol = tmp_path / "s.json"
        assert main(["solve", str(g), "--memory-cap", "64", "--out", str(sol)]) == EXIT_OOM
        assert str(read_solution(sol).result.status) == "out_of_memory"

    def test_threads_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LCGE_THREADS", "2")
        sol = tmp_path / "s.json"
        assert main(["solve", str(write_ideal(tmp_path, 2)), "--out", str(sol)]) == 0
        assert read_solution(sol).threads == 2


class TestVerify:
    def solved(self, tmp_path):
        g = tmp_path / "g.json"
        main(["generate", "--size", "3", "--broken-ratio", "0.05", "--seed", "2", "--out", str(g)])
        sol = tmp_path / "s.json"
        main(["solve", str(g), "--out", str(sol)])
        return g, sol

    def test_valid(self, tmp_path, capsys):
        g, sol = self.solved(tmp_path)
        capsys.readouterr()
        assert main(["verify", str(g), str(sol)]) == EXIT_OK
        assert "valid" in capsys.readouterr().out

    def test_tampered_chain(self, tmp_path, capsys):
        g, sol = self.solved(tmp_path)
        data = json.loads(sol.read_text())
        data["chains"][0]["horizontal"] = data["chains"][0]["horizontal"][:1]
        data["chains"][0]["vertical"] = data["chains"][0]["vertical"][:1]
        sol.write_text(json.dumps(data))
        capsys.readouterr()
        assert main(["verify", str(g), str(sol)]) == EXIT_INVALID
        assert "pair_not_connected" in capsys.readouterr().out

    def test_dropping_a_chain_consistently_stays_valid(self, tmp_path):
        g, sol = self.solved(tmp_path)
        data = json.loads(sol.read_text())
        data["chains"] = data["chains"][1:]
        data["activated"] = data["activated"][1:]
        data["objective"] -= 1
        sol.write_text(json.dumps(data))
        assert main(["verify", str(g), str(sol)]) == EXIT_OK

    def test_chain_count_must_match_objective(self, tmp_path, capsys):
        g, sol = self.solved(tmp_path)
        data = json.loads(sol.read_text())
        data["chains"] = data["chains"][1:]
        sol.write_text(json.dumps(data))
        capsys.readouterr()
        assert main(["verify", str(g), str(sol)]) == EXIT_INVALID
        assert "chain count" in capsys.readouterr().out

    def test_dims_mismatch(self, tmp_path):
        _, sol = self.solved(tmp_path)
        assert main(["verify", str(write_ideal(tmp_path, 4, "other.json")), str(sol)]) == EXIT_USAGE

    def test_unreadable_solution(self, tmp_path):
        g, sol = self.solved(tmp_path)
        sol.write_text("{")
        assert main(["verify", str(g), str(sol)]) == EXIT_USAGE


class TestExportLp:
    def test_smallest_ideal(self, tmp_path, capsys):
        assert main(["export-lp", str(write_ideal(tmp_path, 1))]) == 0
        out = capsys.readouterr().out
        binaries = out.split("Binary\n", 1)[1].split("End")[0].split()
        assert len(binaries) == 16

    def test_golden_bytes(self, tmp_path):
        out = tmp_path / "m.lp"
        assert main(["export-lp", str(DATA / "golden_c334.json"), "--out", str(out)]) == 0
        assert out.read_bytes() == (DATA / "golden_c334.lp").read_bytes()

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "lcge", "export-lp", str(DATA / "golden_c334.json")],
                              capture_output=True, check=True)
        assert proc.stdout == (DATA / "golden_c334.lp").read_bytes()


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def strip_wall(rows):
    return [{k: v for k, v in r.items() if k != "wall_seconds"} for r in rows]


class TestBench:
    def run(self, out, *extra):
        return main(["bench", "--sizes", "4", "--ratios", "0", "0.02", "--instances-per-cell", "3",
                     "--timeout", "30", "--out-csv", str(out), *extra])

    def test_sweep_and_aggregate(self, tmp_path):
        out = tmp_path / "bench.csv"
        assert self.run(out) == 0
        rows = read_csv(out)
        assert len(rows) == 6
        agg = {float(r["b"]): r for r in read_csv(aggregate_path(out))}
        assert float(agg[0.0]["mean_ratio"]) == 1.0
        assert float(agg[0.02]["mean_ratio"]) <= 1.0
        # aggregate is recomputable from the per-instance rows alone
        report = BenchReport.from_rows(rows)
        assert report.aggregate_rows()[1]["mean_ratio"] == float(agg[0.02]["mean_ratio"])
        objs = [int(r["objective"]) for r in rows if float(r["b"]) == 0.02]
        assert report.mean_ratio(4, 0.02) == Fraction(sum(objs), 3 * 16)
        assert {int(r["seed"]) for r in rows} == {
            instance_seed(0, 4, 4, b, i) for b in (0.0, 0.02) for i in range(3)}

    def test_resume_skips_completed_cells(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        assert self.run(out) == 0
        before = read_csv(out)
        cells = tmp_path / "bench.csv.cells"
        kept = (cells / "s4_b0.0.csv").read_bytes()
        (cells / "s4_b0.02.csv").unlink()
        capsys.readouterr()
        assert self.run(out) == 0
        err = capsys.readouterr().err
        assert "skipping completed cell s=4 b=0.0" in err
        assert "b=0.02" not in err
        assert (cells / "s4_b0.0.csv").read_bytes() == kept
        assert strip_wall(read_csv(out)) == strip_wall(before)

    def test_parallel_workers_agree(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert self.run(a) == 0 and self.run(b, "--workers", "2") == 0
        assert strip_wall(read_csv(a)) == strip_wall(read_csv(b))

    def test_requires_output(self):
        assert main(["bench", "--sizes", "2"]) == EXIT_USAGE


class TestConfig:
    def test_values_apply_and_flags_override(self, tmp_path):
        cfg = tmp_path / "lcge.toml"
        cfg.write_text('seed = 7\n[generate]\nsize = 8\nbroken-ratio = 0.02\n')
        out = tmp_path / "g.json"
        assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert (data["cell_rows"], data["provenance"]) == (8, {"b": 0.02, "seed": 7})
        assert main(["generate", "--config", str(cfg), "--size", "2", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["cell_rows"] == 2

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "lcge.toml"
        cfg.write_text("colour = 'blue'\n")
        assert main(["generate", "--config", str(cfg)]) == EXIT_USAGE

    def test_bad_file(self, tmp_path):
        cfg = tmp_path / "lcge.toml"
        cfg.write_text("size = \n")
        assert main(["generate", "--config", str(cfg)]) == EXIT_USAGE
        assert main(["generate", "--config", str(tmp_path / "missing.toml")]) == EXIT_USAGE


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
