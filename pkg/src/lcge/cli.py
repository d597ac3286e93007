"""Command-line front end.

Subcommands: ``generate``, ``solve``, ``verify``, ``export-lp`` and ``bench``.
Every flag can also be given in a TOML file passed with ``--config``; keys use
the long flag name (dashes or underscores) either at top level or inside a
table named after the subcommand.  Flags on the command line win.

Exit codes: 0 success/optimal/valid, 1 invalid embedding, 2 usage or input
error, 3 feasible_timeout, 4 out_of_memory.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import tomli

from .embedding import extract_embedding, verify_embedding
from .errors import LcgeError, ModelTooLarge
from .instances import (
    InstanceSpec,
    Provenance,
    SolutionRecord,
    generate,
    read_instance_with_provenance,
    read_solution,
    write_instance,
    write_solution,
)
from .model import EXACT, HEURISTIC, build_model, export_lp
from .result import SolveResult, SolveStats, Status
from .solver import DEFAULT_MEMORY_CAP, default_threads, solve

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_TIMEOUT = 3
EXIT_OOM = 4

_STATUS_EXIT = {
    Status.OPTIMAL: EXIT_OK,
    Status.FEASIBLE_TIMEOUT: EXIT_TIMEOUT,
    Status.OUT_OF_MEMORY: EXIT_OOM,
    Status.INFEASIBLE_MODEL: EXIT_USAGE,
}

BENCH_FIELDS = ["s", "b", "instance_index", "seed", "objective", "status", "wall_seconds"]
AGGREGATE_FIELDS = ["s", "b", "mean_ratio", "median", "q1", "q3", "solved_count"]
ERROR_STATUS = "error"


def _err(msg: str) -> None:
    print(f"lcge: error: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    if args.size is None:
        _err("--size is required")
        return EXIT_USAGE
    try:
        spec = InstanceSpec(args.size, args.cols or args.size, args.depth, args.broken_ratio, args.seed)
        g = generate(spec)
    except LcgeError as exc:
        _err(str(exc))
        return EXIT_USAGE
    prov = Provenance(args.broken_ratio, args.seed)
    if args.out:
        write_instance(g, args.out, prov)
    else:
        write_instance(g, sys.stdout, prov)
    print(f"generated C({spec.cell_rows},{spec.cell_cols},{spec.depth}) with {g.num_broken} broken vertices",
          file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve


def _load_instance(path):
    if path is None:
        _err("an instance file is required")
        return None
    try:
        return read_instance_with_provenance(path)
    except FileNotFoundError:
        _err(f"instance file not found: {path}")
    except LcgeError as exc:
        _err(f"cannot read instance {path}: {exc}")
    return None


def _model_args(args):
    if args.mode == HEURISTIC and args.max_rect_ratio is None:
        raise LcgeError("--mode heuristic needs --max-rect-ratio")
    if args.mode == EXACT and args.max_rect_ratio is not None:
        raise LcgeError("--max-rect-ratio only applies to --mode heuristic")
    return args.mode, args.max_rect_ratio


def run_solve(g, mode, m, timeout, threads, memory_cap=DEFAULT_MEMORY_CAP) -> SolveResult:
    """Build and solve; model construction does not count against ``timeout``."""
    try:
        model = build_model(g, mode, m)
    except ModelTooLarge:
        return SolveResult(0, frozenset(), Status.OUT_OF_MEMORY, SolveStats())
    return solve(model, timeout, threads, memory_cap=memory_cap)


def cmd_solve(args) -> int:
    loaded = _load_instance(args.instance)
    if loaded is None:
        return EXIT_USAGE
    g, prov = loaded
    try:
        mode, m = _model_args(args)
        result = run_solve(g, mode, m, args.timeout, args.threads, args.memory_cap)
    except LcgeError as exc:
        _err(str(exc))
        return EXIT_USAGE
    record = SolutionRecord(
        dims=g.dims,
        result=result,
        embedding=extract_embedding(g, result.activated),
        mode=mode,
        m=m,
        budget=args.timeout,
        seed=prov.seed,
        threads=args.threads,
    )
    if args.out:
        write_solution(record, args.out)
    else:
        write_solution(record, sys.stdout)
    print(f"objective={result.objective} status={result.status} "
          f"nodes={result.stats.nodes} wall={result.stats.wall_seconds:.3f}s", file=sys.stderr)
    return _STATUS_EXIT[result.status]


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    loaded = _load_instance(args.instance)
    if loaded is None:
        return EXIT_USAGE
    g, _ = loaded
    if args.solution is None:
        _err("a solution file is required")
        return EXIT_USAGE
    try:
        record = read_solution(args.solution)
    except FileNotFoundError:
        _err(f"solution file not found: {args.solution}")
        return EXIT_USAGE
    except LcgeError as exc:
        _err(f"cannot read solution {args.solution}: {exc}")
        return EXIT_USAGE
    if record.dims != g.dims:
        _err(f"solution is for {record.dims} but the instance is {g.dims}")
        return EXIT_USAGE
    report = verify_embedding(g, record.embedding)
    print(report.summary())
    if report.valid and report.clique_size != record.result.objective:
        print(f"chain count {report.clique_size} != recorded objective {record.result.objective}")
        return EXIT_INVALID
    return EXIT_OK if report.valid else EXIT_INVALID


# ---------------------------------------------------------------------------
# export-lp


def cmd_export_lp(args) -> int:
    loaded = _load_instance(args.instance)
    if loaded is None:
        return EXIT_USAGE
    g, _ = loaded
    try:
        mode, m = _model_args(args)
        model = build_model(g, mode, m)
    except ModelTooLarge as exc:
        _err(str(exc))
        return EXIT_OOM
    except LcgeError as exc:
        _err(str(exc))
        return EXIT_USAGE
    if args.out:
        with open(args.out, "wb") as fh:
            export_lp(model, fh)
    else:
        export_lp(model, sys.stdout.buffer)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


@dataclass
class CellResult:
    objectives: list = field(default_factory=list)
    statuses: list = field(default_factory=list)
    wall_seconds: list = field(default_factory=list)


@dataclass
class BenchReport:
    """Per-instance results of a sweep, grouped by ``(s, b)`` cell.

    The averaged solution ratio of a cell is the mean objective divided by the
    ideal clique size ``d*s``.
    """

    depth: int = 4
    cells: dict = field(default_factory=dict)

    def add(self, s: int, b: float, objective: int, status: str, wall: float) -> None:
        cell = self.cells.setdefault((s, b), CellResult())
        cell.objectives.append(objective)
        cell.statuses.append(status)
        cell.wall_seconds.append(wall)

    @classmethod
    def from_rows(cls, rows, depth: int = 4) -> "BenchReport":
        report = cls(depth)
        for row in rows:
            report.add(int(row["s"]), float(row["b"]), int(row["objective"]), row["status"],
                       float(row["wall_seconds"]))
        return report

    def mean_ratio(self, s: int, b: float) -> Fraction:
        obj = self.cells[(s, b)].objectives
        return Fraction(sum(obj), len(obj) * self.depth * s)

    def solved_count(self, s: int, b: float) -> int:
        return sum(1 for st in self.cells[(s, b)].statuses if st == str(Status.OPTIMAL))

    def quartiles(self, s: int, b: float) -> tuple[float, float, float]:
        q1, med, q3 = np.percentile(self.cells[(s, b)].objectives, [25, 50, 75])
        return float(q1), float(med), float(q3)

    def aggregate_rows(self) -> list[dict]:
        rows = []
        for s, b in sorted(self.cells):
            q1, med, q3 = self.quartiles(s, b)
            rows.append({
                "s": s,
                "b": b,
                "mean_ratio": float(self.mean_ratio(s, b)),
                "median": med,
                "q1": q1,
                "q3": q3,
                "solved_count": self.solved_count(s, b),
            })
        return rows


def instance_seed(base_seed: int, s: int, depth: int, b: float, index: int) -> int:
    """Per-instance seed, a pure function of the sweep coordinates."""
    key = f"{base_seed}:{s}:{depth}:{b!r}:{index}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


def _cell_path(cells_dir: Path, s: int, b: float) -> Path:
    return cells_dir / f"s{s}_b{b!r}.csv"


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def run_cell(task: dict) -> list[dict]:
    """Solve every instance of one ``(s, b)`` cell; failures become ``error`` rows."""
    s, b, depth = task["s"], task["b"], task["depth"]
    rows = []
    for index in range(task["count"]):
        seed = instance_seed(task["base_seed"], s, depth, b, index)
        row = {"s": s, "b": b, "instance_index": index, "seed": seed}
        try:
            g = generate(InstanceSpec.square(s, depth, b, seed))
            m = task["max_rect_ratio"] if task["mode"] == HEURISTIC else None
            res = run_solve(g, task["mode"], m, task["timeout"], task["threads"], task["memory_cap"])
            row.update(objective=res.objective, status=str(res.status),
                       wall_seconds=f"{res.stats.wall_seconds:.6f}")
        except Exception as exc:  # recorded, never aborts the sweep
            print(f"lcge: cell s={s} b={b} instance {index} failed: {exc}", file=sys.stderr)
            row.update(objective=0, status=ERROR_STATUS, wall_seconds="0")
        rows.append(row)
    _write_atomic(Path(task["path"]), _csv_text(BENCH_FIELDS, rows))
    return rows


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def aggregate_path(out_csv: Path) -> Path:
    return out_csv.with_name(out_csv.stem + "_aggregate.csv")


def cmd_bench(args) -> int:
    if not args.out_csv:
        _err("--out-csv is required")
        return EXIT_USAGE
    try:
        _model_args(args)
        for b in args.ratios:
            InstanceSpec.square(1, args.depth, b)
    except LcgeError as exc:
        _err(str(exc))
        return EXIT_USAGE
    out_csv = Path(args.out_csv)
    cells_dir = out_csv.with_name(out_csv.name + ".cells")
    cells_dir.mkdir(parents=True, exist_ok=True)
    grid = [(s, b) for s in args.sizes for b in args.ratios]
    todo = []
    for s, b in grid:
        path = _cell_path(cells_dir, s, b)
        if path.exists():
            print(f"lcge: skipping completed cell s={s} b={b}", file=sys.stderr)
            continue
        todo.append({
            "s": s, "b": b, "depth": args.depth, "count": args.instances_per_cell,
            "base_seed": args.seed, "mode": args.mode, "max_rect_ratio": args.max_rect_ratio,
            "timeout": args.timeout, "threads": args.threads, "memory_cap": args.memory_cap,
            "path": str(path),
        })
    if args.workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            list(pool.map(run_cell, todo))
    else:
        for task in todo:
            run_cell(task)

    rows = []
    for s, b in grid:
        rows.extend(_read_csv(_cell_path(cells_dir, s, b)))
    _write_atomic(out_csv, _csv_text(BENCH_FIELDS, rows))
    report = BenchReport.from_rows(rows, args.depth)
    _write_atomic(aggregate_path(out_csv), _csv_text(AGGREGATE_FIELDS, report.aggregate_rows()))
    for row in report.aggregate_rows():
        print(f"s={row['s']} b={row['b']} mean_ratio={row['mean_ratio']:.4f} "
              f"solved={row['solved_count']}/{args.instances_per_cell}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[EXACT, HEURISTIC], default=EXACT)
    p.add_argument("--max-rect-ratio", type=float, default=None,
                   help="rectangle ratio m for the heuristic model")


def _add_solve_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--timeout", type=float, default=3600.0, help="solve budget in seconds")
    p.add_argument("--threads", type=int, default=default_threads(),
                   help="worker processes per solve (default: $LCGE_THREADS or 1)")
    p.add_argument("--memory-cap", type=int, default=DEFAULT_MEMORY_CAP,
                   help="bytes of open search nodes before giving up")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcge", description="Largest complete graph embedding in broken Chimera graphs.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file supplying defaults for any flag")

    p = sub.add_parser("generate", parents=[common], help="generate a random broken instance")
    p.add_argument("--size", type=int, help="unit cells per side (rows)")
    p.add_argument("--cols", type=int, help="unit cell columns (default: --size)")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--broken-ratio", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="instance file (default: stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", parents=[common], help="solve an instance")
    p.add_argument("instance", nargs="?")
    _add_model_flags(p)
    _add_solve_flags(p)
    p.add_argument("--out", help="solution file (default: stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="verify a solution file against an instance")
    p.add_argument("instance", nargs="?")
    p.add_argument("solution", nargs="?")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export-lp", parents=[common], help="write the model in LP format")
    p.add_argument("instance", nargs="?")
    _add_model_flags(p)
    p.add_argument("--out", help="LP file (default: stdout)")
    p.set_defaults(func=cmd_export_lp)

    p = sub.add_parser("bench", parents=[common], help="run a size x ratio sweep")
    p.add_argument("--sizes", type=int, nargs="+", default=[4])
    p.add_argument("--ratios", type=float, nargs="+", default=[0.0])
    p.add_argument("--instances-per-cell", type=int, default=10)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--seed", type=int, default=0, help="base seed for per-instance seeds")
    p.add_argument("--workers", type=int, default=1, help="cells solved concurrently")
    _add_model_flags(p)
    _add_solve_flags(p)
    p.add_argument("--out-csv", help="per-instance CSV; the aggregate goes next to it")
    p.set_defaults(func=cmd_bench)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def load_config(path: str, command: str, sub: argparse.ArgumentParser) -> dict:
    """Flag defaults for ``command`` from a TOML file."""
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    section = data.get(command, {})
    merged = {k: v for k, v in data.items() if not isinstance(v, dict)}
    merged.update(section)
    known = {a.dest for a in sub._actions}
    out = {}
    for key, value in merged.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise LcgeError(f"unknown configuration key {key!r} for {command}")
        out[dest] = value
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = _subparser(parser, args.command)
        try:
            sub.set_defaults(**load_config(args.config, args.command, sub))
        except (OSError, tomli.TOMLDecodeError, LcgeError) as exc:
            _err(f"cannot use config {args.config}: {exc}")
            return EXIT_USAGE
        args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
