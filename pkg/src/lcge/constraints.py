"""Mutually exclusive sets (MES) of crossroads caused by broken vertices.

Two crosses fail to meet only when their arms are cut by broken vertices.
Every such conflict is captured by one of three pair constructions:

* two broken horizontal vertices in different inner rows (``HH``),
* two broken vertical vertices in different inner columns (``VV``),
* a broken horizontal and a broken vertical vertex (``MIX``): the *common*
  crossroad ``(r_h, c_v)`` conflicts with a whole rectangle of crossroads.

Members are stored as flat 0-based indices ``(r-1) * n_cols + (c-1)`` in a
CSR layout, since realistic instances produce millions of members.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .chimera import ChimeraGraph, Crossroad, HorizontalVertex, VerticalVertex
from .errors import BoundViolation, InvalidIndexError, ModelTooLarge, PreconditionError

DEFAULT_MAX_ENTRIES = 200_000_000


class IntervalSpec(NamedTuple):
    """Inclusive range of inner indices; empty when ``hi < lo``."""

    lo: int
    hi: int

    def __len__(self) -> int:
        return max(0, self.hi - self.lo + 1)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def indices(self) -> range:
        return range(self.lo, self.hi + 1)


def interval(s1: int, s2, d: int, limit: int) -> IntervalSpec:
    """Inner indices from the boundary up to cell ``s1`` or from ``s1`` to the far boundary.

    Returns ``[1, d*s1]`` if ``s1 <= s2`` and ``[d*s1 - d + 1, d*limit]``
    otherwise.  ``s2`` may be half-integral (``s - 1/2``) to select the far
    side for equal cell indices.
    """
    twice = Fraction(s2) * 2
    if twice.denominator != 1:
        raise InvalidIndexError(f"comparator must be integral or half-integral, got {s2}")
    return _interval2(s1, int(twice), d, limit)


def _interval2(s1: int, s2_twice: int, d: int, limit: int) -> IntervalSpec:
    if not 1 <= s1 <= limit:
        raise InvalidIndexError(f"cell index {s1} outside [1, {limit}]")
    if 2 * s1 <= s2_twice:
        return IntervalSpec(1, d * s1)
    return IntervalSpec(d * s1 - d + 1, d * limit)


class Provenance(NamedTuple):
    """Which broken pair produced a constraint.

    ``detail`` is ``(side,)`` for HH/VV and ``(axis, index)`` for MIX, where
    ``axis`` is ``"row"`` or ``"col"`` and ``index`` the aggregated inner index.
    """

    kind: str
    first: tuple
    second: tuple
    detail: tuple


@dataclass(frozen=True)
class MesConstraint:
    members: frozenset
    provenance: Provenance

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class MixedPairInfo:
    h: HorizontalVertex
    v: VerticalVertex
    common: Crossroad
    rect_rows: IntervalSpec
    rect_cols: IntervalSpec
    rect_cells: int


@dataclass(frozen=True, eq=False)
class MixedGroup:
    """All constraints of one mixed pair, as used for branching."""

    info: MixedPairInfo
    common: int
    rectangle: np.ndarray


class ConstraintSet(Sequence):
    """Immutable, deduplicated sequence of :class:`MesConstraint` in CSR form.

    ``group_of[i]`` is the index into ``mixed_groups`` for MIX constraints
    and ``-1`` otherwise.
    """

    def __init__(self, n_cols, indptr, indices, provenance, group_of, mixed_groups):
        self.n_cols = n_cols
        self.indptr = indptr
        self.indices = indices
        self.provenance = tuple(provenance)
        self.group_of = group_of
        self.mixed_groups = tuple(mixed_groups)
        for arr in (indptr, indices, group_of):
            arr.setflags(write=False)

    @classmethod
    def from_constraints(cls, n_cols: int, constraints) -> "ConstraintSet":
        """Plain constraint set without mixed-pair grouping (no MIX branching info)."""
        chunks, provenance = [], []
        for con in constraints:
            flat = sorted((rc[0] - 1) * n_cols + (rc[1] - 1) for rc in con.members)
            chunks.append(np.asarray(flat, dtype=np.int32))
            provenance.append(con.provenance)
        indptr = np.zeros(len(chunks) + 1, dtype=np.int64)
        np.cumsum([len(c) for c in chunks], out=indptr[1:])
        indices = np.concatenate(chunks).astype(np.int32) if chunks else np.empty(0, np.int32)
        group_of = np.full(len(chunks), -1, dtype=np.int64)
        return cls(n_cols, indptr, indices, provenance, group_of, [])

    def __len__(self) -> int:
        return len(self.provenance)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return MesConstraint(frozenset(self._crossroads(self.members_flat(i))), self.provenance[i])

    def members_flat(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def _crossroads(self, flat):
        return (Crossroad(int(f) // self.n_cols + 1, int(f) % self.n_cols + 1) for f in flat)

    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def num_entries(self) -> int:
        return int(self.indptr[-1])

    def count_by_kind(self) -> dict[str, int]:
        out = {"HH": 0, "VV": 0, "MIX": 0}
        for p in self.provenance:
            out[p.kind] += 1
        return out

    def member_sets(self) -> list[frozenset]:
        return [frozenset(self._crossroads(self.members_flat(i))) for i in range(len(self))]


def _check_pair(g: ChimeraGraph, a, b, broken, what: str):
    if a == b:
        raise PreconditionError(f"{what} pair must consist of two distinct vertices")
    for x in (a, b):
        if x not in broken:
            raise PreconditionError(f"{tuple(x)} is not a broken {what} vertex")


def _filtered(flat: np.ndarray, mask_flat: np.ndarray) -> np.ndarray:
    return np.unique(flat[mask_flat[flat]]).astype(np.int32)


def _hh_arrays(g: ChimeraGraph, h, k, mask_flat) -> list[tuple[Provenance, np.ndarray]]:
    if h.r == k.r:
        return []
    d, nc, limit = g.depth, g.n_cols, g.dims.cell_cols
    near = _interval2(h.cell_col, 2 * k.cell_col, d, limit)
    far = _interval2(k.cell_col, 2 * h.cell_col - 1, d, limit)
    near_c = np.arange(near.lo - 1, near.hi)
    far_c = np.arange(far.lo - 1, far.hi)
    out = []
    for side, (ra, rb) in enumerate(((h.r, k.r), (k.r, h.r)), start=1):
        flat = np.concatenate(((ra - 1) * nc + near_c, (rb - 1) * nc + far_c))
        members = _filtered(flat, mask_flat)
        if len(members) >= 2:
            out.append((Provenance("HH", tuple(h), tuple(k), (side,)), members))
    return out


def _vv_arrays(g: ChimeraGraph, v, w, mask_flat) -> list[tuple[Provenance, np.ndarray]]:
    if v.c == w.c:
        return []
    d, nc, limit = g.depth, g.n_cols, g.dims.cell_rows
    near = _interval2(v.cell_row, 2 * w.cell_row, d, limit)
    far = _interval2(w.cell_row, 2 * v.cell_row - 1, d, limit)
    near_r = np.arange(near.lo - 1, near.hi)
    far_r = np.arange(far.lo - 1, far.hi)
    out = []
    for side, (ca, cb) in enumerate(((v.c, w.c), (w.c, v.c)), start=1):
        flat = np.concatenate((near_r * nc + (ca - 1), far_r * nc + (cb - 1)))
        members = _filtered(flat, mask_flat)
        if len(members) >= 2:
            out.append((Provenance("VV", tuple(v), tuple(w), (side,)), members))
    return out


def _member_mask(g: ChimeraGraph, filter_available: bool) -> np.ndarray:
    if filter_available:
        return g.available_mask.ravel()
    return np.ones(g.n_rows * g.n_cols, dtype=bool)


def mes_horizontal_pair(g: ChimeraGraph, h, k, *, filter_available: bool = True) -> list[MesConstraint]:
    """The (up to) two MES produced by broken horizontal vertices ``h`` and ``k``.

    With ``filter_available=False`` the raw sets are returned, including
    crossroads that are unavailable anyway.
    """
    h, k = HorizontalVertex(*h), HorizontalVertex(*k)
    _check_pair(g, h, k, g.broken_h, "horizontal")
    mask = _member_mask(g, filter_available)
    return [_to_constraint(g, p, m) for p, m in _hh_arrays(g, h, k, mask)]


def mes_vertical_pair(g: ChimeraGraph, v, w, *, filter_available: bool = True) -> list[MesConstraint]:
    v, w = VerticalVertex(*v), VerticalVertex(*w)
    _check_pair(g, v, w, g.broken_v, "vertical")
    mask = _member_mask(g, filter_available)
    return [_to_constraint(g, p, m) for p, m in _vv_arrays(g, v, w, mask)]


def _to_constraint(g: ChimeraGraph, prov: Provenance, flat: np.ndarray) -> MesConstraint:
    nc = g.n_cols
    return MesConstraint(
        frozenset(Crossroad(int(f) // nc + 1, int(f) % nc + 1) for f in flat), prov
    )


def mixed_pair_info(g: ChimeraGraph, h, v) -> MixedPairInfo | None:
    """Common crossroad and conflict rectangle of a mixed broken pair.

    ``None`` when both vertices share a unit-cell row or column: the common
    crossroad then touches a broken vertex and nothing is left to forbid.
    """
    h, v = HorizontalVertex(*h), VerticalVertex(*v)
    cell_row_h, cell_col_v = g.u(h.r), g.u(v.c)
    if cell_row_h == v.cell_row or cell_col_v == h.cell_col:
        return None
    d = g.depth
    rows = _interval2(v.cell_row, 2 * cell_row_h, d, g.dims.cell_rows)
    cols = _interval2(h.cell_col, 2 * cell_col_v, d, g.dims.cell_cols)
    return MixedPairInfo(
        h=h,
        v=v,
        common=Crossroad(h.r, v.c),
        rect_rows=rows,
        rect_cols=cols,
        rect_cells=(len(rows) // d) * (len(cols) // d),
    )


def _mixed_arrays(g: ChimeraGraph, info: MixedPairInfo, mask_flat):
    """Aggregated MES of one mixed pair plus the filtered rectangle."""
    nc = g.n_cols
    common = (info.common.r - 1) * nc + (info.common.c - 1)
    if not mask_flat[common]:
        return common, [], np.empty(0, dtype=np.int32)
    rows = np.arange(info.rect_rows.lo - 1, info.rect_rows.hi)
    cols = np.arange(info.rect_cols.lo - 1, info.rect_cols.hi)
    grid = rows[:, None] * nc + cols[None, :]
    by_row = len(rows) <= len(cols)
    if not by_row:
        grid = grid.T
    usable = mask_flat[grid]
    prov_head = ("MIX", tuple(info.h), tuple(info.v))
    lines = rows if by_row else cols
    axis = "row" if by_row else "col"
    out = []
    for line, cells, ok in zip(lines, grid, usable):
        if not ok.any():
            continue
        members = np.sort(np.append(cells[ok], common)).astype(np.int32)
        out.append((Provenance(*prov_head, (axis, int(line) + 1)), members))
    rectangle = np.sort(grid[usable]).astype(np.int32)
    return common, out, rectangle


def mes_mixed_pair(g: ChimeraGraph, info: MixedPairInfo, *, filter_available: bool = True) -> list[MesConstraint]:
    """Rectangle conflicts aggregated per row or per column, whichever gives fewer sets."""
    _, arrays, _ = _mixed_arrays(g, info, _member_mask(g, filter_available))
    return [_to_constraint(g, p, m) for p, m in arrays]


def _heuristic_threshold(g: ChimeraGraph, m) -> Fraction:
    ratio = Fraction(m).limit_denominator(10**9) if isinstance(m, float) else Fraction(m)
    if not 0 <= ratio <= 1:
        raise PreconditionError(f"maximum rectangle ratio must lie in [0, 1], got {m}")
    return ratio * g.dims.cell_rows * g.dims.cell_cols


def count_bound(g: ChimeraGraph) -> int:
    bh, bv = len(g.broken_h), len(g.broken_v)
    n = min(g.n_rows, g.n_cols)
    return bh * bh - bh + bv * bv - bv + (n - 1) * bh * bv


def check_count_bounds(g: ChimeraGraph, counts: dict[str, int]) -> None:
    bh, bv = len(g.broken_h), len(g.broken_v)
    n = min(g.n_rows, g.n_cols)
    if counts["HH"] > bh * bh - bh:
        raise BoundViolation(f"{counts['HH']} HH constraints exceed bound {bh * bh - bh}")
    if counts["VV"] > bv * bv - bv:
        raise BoundViolation(f"{counts['VV']} VV constraints exceed bound {bv * bv - bv}")
    if counts["MIX"] > (n - 1) * bh * bv:
        raise BoundViolation(f"{counts['MIX']} MIX constraints exceed bound {(n - 1) * bh * bv}")
    total = sum(counts.values())
    if total > count_bound(g):
        raise BoundViolation(f"{total} MES exceed total bound {count_bound(g)}")


def mixed_pairs(g: ChimeraGraph) -> list[MixedPairInfo]:
    out = []
    for h in sorted(g.broken_h):
        for v in sorted(g.broken_v):
            info = mixed_pair_info(g, h, v)
            if info is not None:
                out.append(info)
    return out


def excluded_commons(g: ChimeraGraph, m) -> frozenset[Crossroad]:
    """Common crossroads whose rectangle covers at least ``m * sR * sC`` unit cells."""
    threshold = _heuristic_threshold(g, m)
    return frozenset(
        info.common for info in mixed_pairs(g) if info.rect_cells >= threshold
    )


def generate_constraints(
    g: ChimeraGraph, m=None, *, max_entries: int | None = DEFAULT_MAX_ENTRIES
) -> tuple[ConstraintSet, frozenset[Crossroad]]:
    """All MES of the exact model (``m is None``) or the heuristic model.

    Returns the deduplicated constraints and the set of common crossroads
    excluded in advance (empty in exact mode).  Members are restricted to
    crossroads that remain variables.
    """
    pairs = mixed_pairs(g)
    if m is None:
        excluded: frozenset[Crossroad] = frozenset()
        kept_pairs = pairs
    else:
        threshold = _heuristic_threshold(g, m)
        excluded = frozenset(p.common for p in pairs if p.rect_cells >= threshold)
        kept_pairs = [p for p in pairs if p.rect_cells < threshold]

    if max_entries is not None:
        estimate = sum(len(p.rect_rows) * len(p.rect_cols) for p in kept_pairs)
        if estimate > max_entries:
            raise ModelTooLarge(
                f"mixed-pair rectangles hold ~{estimate} entries, cap is {max_entries}"
            )

    mask = g.available_mask.copy()
    for rc in excluded:
        mask[rc.r - 1, rc.c - 1] = False
    mask_flat = mask.ravel()

    arrays: list[tuple[Provenance, np.ndarray, int]] = []
    for h, k in combinations(sorted(g.broken_h), 2):
        arrays.extend((p, a, -1) for p, a in _hh_arrays(g, h, k, mask_flat))
    for v, w in combinations(sorted(g.broken_v), 2):
        arrays.extend((p, a, -1) for p, a in _vv_arrays(g, v, w, mask_flat))
    groups: list[MixedGroup] = []
    for info in kept_pairs:
        common, mixed, rectangle = _mixed_arrays(g, info, mask_flat)
        if not mixed:
            continue
        arrays.extend((p, a, len(groups)) for p, a in mixed)
        groups.append(MixedGroup(info, common, rectangle))

    seen: set[bytes] = set()
    provenance, chunks, group_of = [], [], []
    for prov, members, group in arrays:
        key = members.tobytes()
        if key in seen:
            continue
        seen.add(key)
        provenance.append(prov)
        chunks.append(members)
        group_of.append(group)
    sizes = np.fromiter((len(c) for c in chunks), dtype=np.int64, count=len(chunks))
    indptr = np.zeros(len(chunks) + 1, dtype=np.int64)
    np.cumsum(sizes, out=indptr[1:])
    indices = np.concatenate(chunks).astype(np.int32) if chunks else np.empty(0, np.int32)
    cs = ConstraintSet(
        g.n_cols, indptr, indices, provenance, np.asarray(group_of, dtype=np.int64), groups
    )
    check_count_bounds(g, cs.count_by_kind())
    return cs, excluded
