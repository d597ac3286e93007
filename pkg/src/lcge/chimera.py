"""Broken Chimera hardware graphs in inner-row / inner-column coordinates.

A Chimera graph ``C(sR, sC, d)`` is an ``sR x sC`` lattice of ``K_{d,d}`` unit
cells.  Every vertex is addressed by one "inner" index (a qubit-level row or
column in ``1..d*s``) and one unit-cell index:

* a *horizontal* vertex ``(r, j)`` sits in inner row ``r`` and cell column
  ``j``; horizontal vertices of one inner row are chained left to right,
* a *vertical* vertex ``(i, c)`` sits in cell row ``i`` and inner column
  ``c``; vertical vertices of one inner column are chained top to bottom.

The intra-cell edge between ``(r, u(c))`` and ``(u(r), c)`` is called the
crossroad ``(r, c)``.  All indices are 1-based.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidIndexError, PreconditionError, ValidationError


class HorizontalVertex(NamedTuple):
    r: int
    cell_col: int

    # Vertices of the two kinds share coordinate tuples, e.g. H(1, 2) and
    # V(1, 2); equality and hashing include the kind so mixed sets stay exact.
    def __eq__(self, other):
        return type(other) is type(self) and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(("H",) + tuple(self))


class VerticalVertex(NamedTuple):
    cell_row: int
    c: int

    def __eq__(self, other):
        return type(other) is type(self) and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(("V",) + tuple(self))


class Crossroad(NamedTuple):
    r: int
    c: int


def unit_cell_index(x: int, d: int) -> int:
    """Map an inner row/column index to its unit-cell index, ``ceil(x / d)``."""
    if x < 1:
        raise InvalidIndexError(f"inner index must be >= 1, got {x}")
    if d < 1:
        raise InvalidIndexError(f"depth must be >= 1, got {d}")
    return -(-x // d)


@dataclass(frozen=True)
class ChimeraDims:
    cell_rows: int
    cell_cols: int
    depth: int = 4

    def __post_init__(self):
        for name in ("cell_rows", "cell_cols", "depth"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value!r}")

    @classmethod
    def square(cls, s: int, depth: int = 4) -> "ChimeraDims":
        return cls(s, s, depth)

    @property
    def n_rows(self) -> int:
        return self.depth * self.cell_rows

    @property
    def n_cols(self) -> int:
        return self.depth * self.cell_cols

    @property
    def num_vertices(self) -> int:
        return 2 * self.depth * self.cell_rows * self.cell_cols


@dataclass(frozen=True)
class ChimeraGraph:
    """Chimera graph with broken vertices.  Immutable once constructed."""

    dims: ChimeraDims
    broken_h: frozenset = field(default_factory=frozenset)
    broken_v: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        bh = _as_vertex_set(self.broken_h, HorizontalVertex, "broken_h")
        bv = _as_vertex_set(self.broken_v, VerticalVertex, "broken_v")
        d = self.dims
        for h in bh:
            if not (1 <= h.r <= d.n_rows and 1 <= h.cell_col <= d.cell_cols):
                raise ValidationError(f"broken horizontal vertex {tuple(h)} out of range")
        for v in bv:
            if not (1 <= v.cell_row <= d.cell_rows and 1 <= v.c <= d.n_cols):
                raise ValidationError(f"broken vertical vertex {tuple(v)} out of range")
        object.__setattr__(self, "broken_h", bh)
        object.__setattr__(self, "broken_v", bv)

    @classmethod
    def ideal(cls, s: int, depth: int = 4) -> "ChimeraGraph":
        return cls(ChimeraDims.square(s, depth))

    @property
    def n_rows(self) -> int:
        return self.dims.n_rows

    @property
    def n_cols(self) -> int:
        return self.dims.n_cols

    @property
    def depth(self) -> int:
        return self.dims.depth

    @property
    def num_broken(self) -> int:
        return len(self.broken_h) + len(self.broken_v)

    @property
    def broken_ratio(self) -> float:
        return self.num_broken / self.dims.num_vertices

    def u(self, x: int) -> int:
        return unit_cell_index(x, self.dims.depth)

    def is_broken(self, vertex: HorizontalVertex | VerticalVertex) -> bool:
        if isinstance(vertex, HorizontalVertex):
            return vertex in self.broken_h
        return vertex in self.broken_v

    @cached_property
    def _broken_cells_by_row(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for h in self.broken_h:
            out.setdefault(h.r, []).append(h.cell_col)
        return {r: sorted(cols) for r, cols in out.items()}

    @cached_property
    def _broken_cells_by_col(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v in self.broken_v:
            out.setdefault(v.c, []).append(v.cell_row)
        return {c: sorted(rows) for c, rows in out.items()}

    @cached_property
    def available_mask(self) -> np.ndarray:
        """Boolean ``(n_rows, n_cols)`` array; entry ``[r-1, c-1]`` marks crossroad ``rc`` usable."""
        d = self.dims.depth
        mask = np.ones((self.n_rows, self.n_cols), dtype=bool)
        for h in self.broken_h:
            mask[h.r - 1, (h.cell_col - 1) * d:h.cell_col * d] = False
        for v in self.broken_v:
            mask[(v.cell_row - 1) * d:v.cell_row * d, v.c - 1] = False
        mask.setflags(write=False)
        return mask

    def is_available(self, rc: Crossroad) -> bool:
        r, c = rc
        if not (1 <= r <= self.n_rows and 1 <= c <= self.n_cols):
            return False
        return bool(self.available_mask[r - 1, c - 1])

    def arm_span(self, line: int, cell: int, horizontal: bool) -> tuple[int, int]:
        """Maximal unbroken run of cells around ``cell`` along an inner row or column."""
        if horizontal:
            blocked = self._broken_cells_by_row.get(line, [])
            limit = self.dims.cell_cols
        else:
            blocked = self._broken_cells_by_col.get(line, [])
            limit = self.dims.cell_rows
        pos = bisect.bisect_left(blocked, cell)
        if pos < len(blocked) and blocked[pos] == cell:
            raise PreconditionError(f"cell {cell} of line {line} is itself broken")
        lo = blocked[pos - 1] + 1 if pos > 0 else 1
        hi = blocked[pos] - 1 if pos < len(blocked) else limit
        return lo, hi


def _as_vertex_set(items: Iterable, kind: type, name: str) -> frozenset:
    items = list(items)
    out = frozenset(kind(*map(int, x)) for x in items)
    if len(out) != len(items):
        raise ValidationError(f"{name} contains duplicate vertices")
    return out


@dataclass(frozen=True)
class Cross:
    """A chain of physical vertices representing one logical vertex.

    Crosses built by :func:`build_cross` consist of one contiguous horizontal
    arm in inner row ``crossroad.r`` and one contiguous vertical arm in inner
    column ``crossroad.c``.  Chains read back from files may be arbitrary
    vertex sets; the verifier makes no shape assumptions.
    """

    crossroad: Crossroad
    horizontal: frozenset
    vertical: frozenset

    @property
    def h_cols(self) -> tuple[int, int]:
        cols = [h.cell_col for h in self.horizontal]
        return min(cols), max(cols)

    @property
    def v_rows(self) -> tuple[int, int]:
        rows = [v.cell_row for v in self.vertical]
        return min(rows), max(rows)

    def vertices(self) -> frozenset:
        return self.horizontal | self.vertical

    def __len__(self) -> int:
        return len(self.horizontal) + len(self.vertical)


def available_crossroads(g: ChimeraGraph) -> frozenset[Crossroad]:
    rows, cols = np.nonzero(g.available_mask)
    return frozenset(Crossroad(int(r) + 1, int(c) + 1) for r, c in zip(rows, cols))


def build_cross(g: ChimeraGraph, rc: Crossroad) -> Cross:
    """Return the maximal cross through an available crossroad."""
    rc = Crossroad(*rc)
    if not g.is_available(rc):
        raise PreconditionError(f"crossroad {tuple(rc)} is not available")
    r, c = rc
    j0, j1 = g.arm_span(r, g.u(c), horizontal=True)
    i0, i1 = g.arm_span(c, g.u(r), horizontal=False)
    return Cross(
        crossroad=rc,
        horizontal=frozenset(HorizontalVertex(r, j) for j in range(j0, j1 + 1)),
        vertical=frozenset(VerticalVertex(i, c) for i in range(i0, i1 + 1)),
    )


def crosses_meet(g: ChimeraGraph, a: Cross, b: Cross) -> bool:
    """Whether an intra-cell edge of ``g`` joins the two crosses.

    Crosses sharing an inner row or column collide rather than meet, so the
    answer is ``False`` for them by convention.
    """
    if a.crossroad.r == b.crossroad.r or a.crossroad.c == b.crossroad.c:
        return False
    return _arm_touches(g, a.horizontal, b.vertical) or _arm_touches(g, b.horizontal, a.vertical)


def _arm_touches(g: ChimeraGraph, horizontal, vertical) -> bool:
    # H(r, j) ~ V(i, c) inside a cell iff i == u(r) and j == u(c)
    cells = {(v.cell_row, g.u(v.c)) for v in vertical if v not in g.broken_v}
    return any(
        (g.u(h.r), h.cell_col) in cells for h in horizontal if h not in g.broken_h
    )
