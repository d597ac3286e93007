"""Seeded random instances and the JSON file formats for instances and solutions.

Sampling scheme
---------------
The candidate list is every horizontal vertex in lexicographic ``(r, cell_col)``
order followed by every vertical vertex in lexicographic ``(cell_row, c)``
order.  A PCG64 bit generator (numpy's ``PCG64(seed)``, whose raw 64-bit
output stream is fixed across platforms and numpy versions) drives a partial
Fisher-Yates shuffle: for ``i = 0 .. k-1`` draw ``j`` uniformly from
``[i, total)`` and swap positions ``i`` and ``j``.  Uniform draws use
rejection on raw 64-bit words, so no floating point is involved.  The first
``k`` candidates are the broken vertices.

Instance file (UTF-8 JSON, LF)::

    {"format_version": 1, "cell_rows": 2, "cell_cols": 2, "depth": 4,
     "broken_horizontal": [[3, 1]], "broken_vertical": [[2, 7]],
     "provenance": {"b": 0.03, "seed": 5}}

Solution file::

    {"format_version": 1, "instance": {"cell_rows": ..., "cell_cols": ..., "depth": ...},
     "mode": "exact", "m": null, "budget": 3600.0, "seed": 5, "threads": 1,
     "objective": 2, "status": "optimal", "stats": {...},
     "activated": [[1, 1], [2, 2]],
     "chains": [{"crossroad": [1, 1], "horizontal": [[1, 1], ...],
                 "vertical": [[1, 1], ...]}, ...]}
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO

import numpy as np

from .chimera import ChimeraDims, ChimeraGraph, Crossroad, HorizontalVertex, VerticalVertex
from .embedding import Embedding, chain_from_vertices
from .errors import ParseError, ValidationError
from .result import SolveResult, SolveStats, Status

FORMAT_VERSION = 1
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class InstanceSpec:
    cell_rows: int
    cell_cols: int
    depth: int = 4
    b: float = 0.0
    seed: int = 0

    def __post_init__(self):
        ChimeraDims(self.cell_rows, self.cell_cols, self.depth)
        if not (isinstance(self.b, (int, float)) and 0.0 <= self.b <= 1.0):
            raise ValidationError(f"broken ratio must lie in [0, 1], got {self.b!r}")
        if not 0 <= self.seed <= _MASK64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @classmethod
    def square(cls, s: int, depth: int = 4, b: float = 0.0, seed: int = 0) -> "InstanceSpec":
        return cls(s, s, depth, b, seed)

    @property
    def dims(self) -> ChimeraDims:
        return ChimeraDims(self.cell_rows, self.cell_cols, self.depth)

    @property
    def total_vertices(self) -> int:
        return self.dims.num_vertices

    @property
    def broken_count(self) -> int:
        """``round(b * total)`` with halves rounded up."""
        k = math.floor(self.b * self.total_vertices + 0.5)
        if k > self.total_vertices:
            raise ValidationError(f"{k} broken vertices requested but only {self.total_vertices} exist")
        return k


def _bounded(gen: np.random.PCG64, n: int) -> int:
    """Uniform integer in ``[0, n)`` from raw 64-bit words (rejection sampling)."""
    limit = (1 << 64) - ((1 << 64) % n)
    while True:
        x = int(gen.random_raw())
        if x < limit:
            return x % n


def _candidates(dims: ChimeraDims) -> list:
    out: list = [
        HorizontalVertex(r, j)
        for r in range(1, dims.n_rows + 1)
        for j in range(1, dims.cell_cols + 1)
    ]
    out += [
        VerticalVertex(i, c)
        for i in range(1, dims.cell_rows + 1)
        for c in range(1, dims.n_cols + 1)
    ]
    return out


def generate(spec: InstanceSpec) -> ChimeraGraph:
    """Chimera graph with ``spec.broken_count`` uniformly chosen broken vertices."""
    k = spec.broken_count
    pool = _candidates(spec.dims)
    gen = np.random.PCG64(spec.seed)
    for i in range(k):
        j = i + _bounded(gen, len(pool) - i)
        pool[i], pool[j] = pool[j], pool[i]
    chosen = pool[:k]
    return ChimeraGraph(
        spec.dims,
        [x for x in chosen if isinstance(x, HorizontalVertex)],
        [x for x in chosen if isinstance(x, VerticalVertex)],
    )


# ---------------------------------------------------------------------------
# JSON helpers


def _load_json(source, what: str) -> dict:
    try:
        if hasattr(source, "read"):
            text = source.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
        if isinstance(text, bytes):
            text = text.decode("utf-8")
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{what} line {exc.lineno} column {exc.colno}") from exc
    except UnicodeDecodeError as exc:
        raise ParseError(str(exc), what) from exc
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object", what)
    return data


def _format(value, indent: int = 0) -> str:
    # objects and lists of containers are broken over lines; flat lists stay inline
    pad = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_format(v, indent + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(value, list) and any(isinstance(v, (list, dict)) for v in value):
        items = [pad + _format(v, indent + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    return json.dumps(value, ensure_ascii=True)


def _dump_json(data: dict, sink) -> None:
    text = _format(data) + "\n"
    if hasattr(sink, "write"):
        try:
            sink.write(text)
        except TypeError:
            sink.write(text.encode("utf-8"))
    else:
        Path(sink).write_bytes(text.encode("utf-8"))


def _field(data: dict, key: str, kind, where: str):
    if key not in data:
        raise ParseError("missing field", f"{where}.{key}")
    value = data[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ParseError(f"expected integer, got {value!r}", f"{where}.{key}")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ParseError(f"expected number, got {value!r}", f"{where}.{key}")
    if kind in (list, dict, str) and not isinstance(value, kind):
        raise ParseError(f"expected {kind.__name__}, got {value!r}", f"{where}.{key}")
    return value


def _pairs(value, where: str) -> list[tuple[int, int]]:
    if not isinstance(value, list):
        raise ParseError("expected a list of [a, b] pairs", where)
    out = []
    for i, item in enumerate(value):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or any(isinstance(x, bool) or not isinstance(x, int) for x in item)
        ):
            raise ParseError(f"expected [int, int], got {item!r}", f"{where}[{i}]")
        out.append((item[0], item[1]))
    return out


def _check_version(data: dict, where: str) -> None:
    version = _field(data, "format_version", int, where)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format_version {version}", f"{where}.format_version")


def _dims_from(data: dict, where: str) -> ChimeraDims:
    values = [_field(data, k, int, where) for k in ("cell_rows", "cell_cols", "depth")]
    return ChimeraDims(*values)


def _dims_dict(dims: ChimeraDims) -> dict:
    return {"cell_rows": dims.cell_rows, "cell_cols": dims.cell_cols, "depth": dims.depth}


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Provenance:
    b: float | None = None
    seed: int | None = None


def read_instance(source: str | Path | IO) -> ChimeraGraph:
    """Load an instance file; the provenance block is accepted but not returned."""
    graph, _ = read_instance_with_provenance(source)
    return graph


def read_instance_with_provenance(source) -> tuple[ChimeraGraph, Provenance]:
    data = _load_json(source, "instance")
    _check_version(data, "instance")
    dims = _dims_from(data, "instance")
    bh = _pairs(_field(data, "broken_horizontal", list, "instance"), "instance.broken_horizontal")
    bv = _pairs(_field(data, "broken_vertical", list, "instance"), "instance.broken_vertical")
    for name, pairs in (("broken_horizontal", bh), ("broken_vertical", bv)):
        if len(set(pairs)) != len(pairs):
            raise ValidationError(f"duplicate vertex in {name}")
    prov = data.get("provenance") or {}
    if not isinstance(prov, dict):
        raise ParseError("expected an object", "instance.provenance")
    graph = ChimeraGraph(dims, [HorizontalVertex(*p) for p in bh], [VerticalVertex(*p) for p in bv])
    return graph, Provenance(prov.get("b"), prov.get("seed"))


def write_instance(g: ChimeraGraph, sink, provenance: Provenance | None = None) -> None:
    prov = provenance or Provenance()
    data = {
        "format_version": FORMAT_VERSION,
        **_dims_dict(g.dims),
        "broken_horizontal": [list(x) for x in sorted(g.broken_h)],
        "broken_vertical": [list(x) for x in sorted(g.broken_v)],
        "provenance": {"b": prov.b, "seed": prov.seed},
    }
    _dump_json(data, sink)


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True)
class SolutionRecord:
    """A solve outcome together with the run parameters and explicit chains."""

    dims: ChimeraDims
    result: SolveResult
    embedding: Embedding
    mode: str = "exact"
    m: float | None = None
    budget: float | None = None
    seed: int | None = None
    threads: int = 1
    extra: dict = field(default_factory=dict)


def write_solution(record: SolutionRecord, sink) -> None:
    res = record.result
    data = {
        "format_version": FORMAT_VERSION,
        "instance": _dims_dict(record.dims),
        "mode": record.mode,
        "m": record.m,
        "budget": record.budget,
        "seed": record.seed,
        "threads": record.threads,
        "objective": res.objective,
        "status": str(res.status),
        "stats": asdict(res.stats),
        "activated": [list(rc) for rc in sorted(res.activated)],
        "chains": [
            {
                "crossroad": list(chain.crossroad),
                "horizontal": [list(x) for x in sorted(chain.horizontal)],
                "vertical": [list(x) for x in sorted(chain.vertical)],
            }
            for chain in record.embedding.chains
        ],
    }
    if record.extra:
        data["extra"] = record.extra
    _dump_json(data, sink)


def read_solution(source) -> SolutionRecord:
    data = _load_json(source, "solution")
    _check_version(data, "solution")
    dims = _dims_from(_field(data, "instance", dict, "solution"), "solution.instance")
    mode = _field(data, "mode", str, "solution")
    m = data.get("m")
    if m is not None and (isinstance(m, bool) or not isinstance(m, (int, float))):
        raise ParseError(f"expected number or null, got {m!r}", "solution.m")
    objective = _field(data, "objective", int, "solution")
    status_text = _field(data, "status", str, "solution")
    try:
        status = Status(status_text)
    except ValueError:
        raise ParseError(f"unknown status {status_text!r}", "solution.status") from None
    stats_data = data.get("stats") or {}
    if not isinstance(stats_data, dict):
        raise ParseError("expected an object", "solution.stats")
    try:
        stats = SolveStats(**stats_data)
    except TypeError as exc:
        raise ParseError(str(exc), "solution.stats") from None
    activated = frozenset(
        Crossroad(*p) for p in _pairs(_field(data, "activated", list, "solution"), "solution.activated")
    )
    if objective != len(activated):
        raise ParseError(f"objective {objective} != {len(activated)} activated crossroads", "solution.objective")
    chains = []
    for i, item in enumerate(_field(data, "chains", list, "solution")):
        where = f"solution.chains[{i}]"
        if not isinstance(item, dict):
            raise ParseError("expected an object", where)
        crossroad = _pairs([_field(item, "crossroad", list, where)], f"{where}.crossroad")[0]
        horizontal = _pairs(_field(item, "horizontal", list, where), f"{where}.horizontal")
        vertical = _pairs(_field(item, "vertical", list, where), f"{where}.vertical")
        chains.append(chain_from_vertices(crossroad, horizontal, vertical))
    threads = data.get("threads", 1)
    return SolutionRecord(
        dims=dims,
        result=SolveResult(objective, activated, status, stats),
        embedding=Embedding(tuple(chains)),
        mode=mode,
        m=None if m is None else float(m),
        budget=data.get("budget"),
        seed=data.get("seed"),
        threads=threads,
        extra=data.get("extra") or {},
    )

