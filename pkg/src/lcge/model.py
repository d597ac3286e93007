"""The embedding ILP: matching constraints plus MES cardinality constraints."""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property
from typing import BinaryIO

import numpy as np

from .chimera import ChimeraDims, ChimeraGraph, Crossroad
from .constraints import (
    DEFAULT_MAX_ENTRIES,
    ConstraintSet,
    check_count_bounds,
    count_bound,
    generate_constraints,
)
from .errors import BoundViolation, PreconditionError

EXACT = "exact"
HEURISTIC = "heuristic"

_TERMS_PER_LINE = 8


@dataclass(frozen=True, eq=False)
class IlpModel:
    """Binary program over crossroads; the objective counts activated variables.

    ``var_mask`` is the ``(n_rows, n_cols)`` boolean array of crossroads that
    remain variables.  Everything else is fixed to zero.
    """

    graph: ChimeraGraph
    mode: str
    max_rect_ratio: float | None
    var_mask: np.ndarray
    mes: ConstraintSet
    excluded: frozenset

    @property
    def dims(self) -> ChimeraDims:
        return self.graph.dims

    @cached_property
    def variables(self) -> frozenset[Crossroad]:
        rows, cols = np.nonzero(self.var_mask)
        return frozenset(Crossroad(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols))

    @cached_property
    def fixed_zero(self) -> frozenset[Crossroad]:
        rows, cols = np.nonzero(~self.var_mask)
        return frozenset(Crossroad(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols))

    @property
    def row_constraints(self) -> list[list[Crossroad]]:
        """Variables of each inner row (at most one may be activated)."""
        return [
            [Crossroad(r + 1, int(c) + 1) for c in np.flatnonzero(self.var_mask[r])]
            for r in range(self.dims.n_rows)
        ]

    @property
    def col_constraints(self) -> list[list[Crossroad]]:
        return [
            [Crossroad(int(r) + 1, c + 1) for r in np.flatnonzero(self.var_mask[:, c])]
            for c in range(self.dims.n_cols)
        ]

    @property
    def mes_constraints(self) -> ConstraintSet:
        return self.mes

    def is_feasible(self, activated) -> bool:
        """Direct evaluation of every constraint on a set of crossroads."""
        chosen = {Crossroad(*rc) for rc in activated}
        rows = [rc.r for rc in chosen]
        cols = [rc.c for rc in chosen]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            return False
        if any(not self.var_mask[rc.r - 1, rc.c - 1] for rc in chosen):
            return False
        x = np.zeros(self.var_mask.size, dtype=np.int64)
        for rc in chosen:
            x[(rc.r - 1) * self.dims.n_cols + rc.c - 1] = 1
        if len(self.mes) == 0:
            return True
        counts = np.add.reduceat(x[self.mes.indices], self.mes.indptr[:-1])
        return bool((counts <= 1).all())


@dataclass(frozen=True)
class ModelStats:
    num_vars: int
    num_row_cons: int
    num_col_cons: int
    num_mes: int
    num_fixed: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.num_vars, self.num_row_cons, self.num_col_cons, self.num_mes, self.num_fixed)


def build_model(
    g: ChimeraGraph,
    mode: str = EXACT,
    m: float | None = None,
    *,
    max_entries: int | None = DEFAULT_MAX_ENTRIES,
) -> IlpModel:
    """Assemble the exact model or the heuristic model with rectangle ratio ``m``."""
    if mode == EXACT:
        if m is not None:
            raise PreconditionError("the exact model takes no rectangle ratio")
    elif mode == HEURISTIC:
        if m is None:
            raise PreconditionError("the heuristic model needs a rectangle ratio")
    else:
        raise PreconditionError(f"unknown mode {mode!r}")
    mes, excluded = generate_constraints(g, m, max_entries=max_entries)
    var_mask = g.available_mask.copy()
    for rc in excluded:
        var_mask[rc.r - 1, rc.c - 1] = False
    var_mask.setflags(write=False)
    return IlpModel(
        graph=g,
        mode=mode,
        max_rect_ratio=None if m is None else float(m),
        var_mask=var_mask,
        mes=mes,
        excluded=excluded,
    )


def model_stats(model: IlpModel) -> ModelStats:
    """Counts of the model, checked against the worst-case size bounds."""
    dims = model.dims
    num_vars = int(model.var_mask.sum())
    stats = ModelStats(
        num_vars=num_vars,
        num_row_cons=dims.n_rows,
        num_col_cons=dims.n_cols,
        num_mes=len(model.mes),
        num_fixed=model.var_mask.size - num_vars,
    )
    g = model.graph
    check_count_bounds(g, model.mes.count_by_kind())
    if stats.num_mes > count_bound(g):
        raise BoundViolation(f"{stats.num_mes} MES exceed bound {count_bound(g)}")
    if stats.num_vars + stats.num_fixed != dims.n_rows * dims.n_cols:
        raise BoundViolation("variables and fixed crossroads do not partition the grid")
    if stats.num_vars < dims.n_rows * dims.n_cols - dims.depth * g.num_broken - len(model.excluded):
        raise BoundViolation("more crossroads lost than broken vertices can block")
    return stats


def _var(flat: int, n_cols: int) -> str:
    return f"x_{flat // n_cols + 1}_{flat % n_cols + 1}"


def _pair(xy) -> str:
    return f"({xy[0]},{xy[1]})"


def _detail(detail: tuple) -> str:
    if len(detail) == 1:
        return f"side={detail[0]}"
    return f"{detail[0]}={detail[1]}"


def _write_sum(out: io.TextIOBase, head: str, names: list[str], tail: str) -> None:
    parts = [head]
    for i in range(0, len(names), _TERMS_PER_LINE):
        chunk = " + ".join(names[i:i + _TERMS_PER_LINE])
        parts.append(chunk if i == 0 else "\n + " + chunk)
    out.write("".join(parts) + tail + "\n")


def export_lp(model: IlpModel, sink: BinaryIO) -> None:
    """Write the model in CPLEX LP format (ASCII, LF line endings).

    Variables fixed to zero are omitted, as are matching rows without
    variables.  Each MES row is preceded by a comment naming its broken pair.
    """
    text = io.StringIO(newline="\n")
    dims = model.dims
    nc = dims.n_cols
    flat_vars = np.flatnonzero(model.var_mask.ravel()).tolist()
    names = [_var(f, nc) for f in flat_vars]
    label = model.mode if model.max_rect_ratio is None else f"{model.mode} m={model.max_rect_ratio!r}"
    text.write(f"\\ largest complete graph embedding, {label}, "
               f"C({dims.cell_rows},{dims.cell_cols},{dims.depth})\n")
    text.write("Maximize\n")
    if names:
        _write_sum(text, " obj: ", names, "")
    else:
        text.write(" obj: 0\n")
    text.write("Subject To\n")
    for r in range(dims.n_rows):
        cols = np.flatnonzero(model.var_mask[r]).tolist()
        if cols:
            _write_sum(text, f"row_{r + 1}: ", [_var(r * nc + c, nc) for c in cols], " <= 1")
    for c in range(nc):
        rows = np.flatnonzero(model.var_mask[:, c]).tolist()
        if rows:
            _write_sum(text, f"col_{c + 1}: ", [_var(r * nc + c, nc) for r in rows], " <= 1")
    for i, prov in enumerate(model.mes.provenance):
        text.write(f"\\ mes_{i + 1} {prov.kind} {_pair(prov.first)}-{_pair(prov.second)} {_detail(prov.detail)}\n")
        members = model.mes.members_flat(i).tolist()
        _write_sum(text, f"mes_{i + 1}: ", [_var(f, nc) for f in members], " <= 1")
    text.write("Binary\n")
    for name in names:
        text.write(f" {name}\n")
    text.write("End\n")
    sink.write(text.getvalue().encode("ascii"))
