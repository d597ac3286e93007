"""Brute-force ground truth for tiny instances.

Enumerates sets of available crossroads with distinct rows and columns whose
crosses pairwise meet.  Feasibility is judged only through
:func:`~lcge.chimera.build_cross` and :func:`~lcge.chimera.crosses_meet`;
nothing here touches the MES construction or the solver.
"""

from __future__ import annotations

import time

from .chimera import ChimeraGraph, available_crossroads, build_cross, crosses_meet
from .errors import LcgeError
from .result import SolveResult, SolveStats, Status

DEFAULT_NODE_CAP = 5_000_000


class OracleRefused(LcgeError):
    """Instance is too large for exhaustive enumeration."""


def _kuhn_bound(rows, candidates, used_cols) -> int:
    """Maximum matching size over rows ``rows`` restricted to ``candidates[r]``."""
    match_col: dict[int, int] = {}

    def try_row(r, seen):
        for c in candidates[r]:
            if c in used_cols or c in seen:
                continue
            seen.add(c)
            if c not in match_col or try_row(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    return sum(1 for r in rows if try_row(r, set()))


def brute_force_optimum(g: ChimeraGraph, cap: int = DEFAULT_NODE_CAP) -> SolveResult:
    """Exact optimum of the cross construction by depth-first enumeration.

    Raises :class:`OracleRefused` once more than ``cap`` nodes are visited.
    """
    start = time.monotonic()
    crossroads = sorted(available_crossroads(g))
    crosses = {rc: build_cross(g, rc) for rc in crossroads}
    meets = {rc: set() for rc in crossroads}
    for i, a in enumerate(crossroads):
        for b in crossroads[i + 1:]:
            if crosses_meet(g, crosses[a], crosses[b]):
                meets[a].add(b)
                meets[b].add(a)
    by_row: dict[int, list] = {r: [] for r in range(1, g.n_rows + 1)}
    for rc in crossroads:
        by_row[rc.r].append(rc)
    rows = list(range(1, g.n_rows + 1))

    best: list = []
    nodes = 0

    def descend(pos: int, chosen: list, used_cols: set, compatible: set) -> None:
        nonlocal best, nodes
        nodes += 1
        if nodes > cap:
            raise OracleRefused(f"more than {cap} nodes; instance too large for the oracle")
        if len(chosen) > len(best):
            best = list(chosen)
        rest = rows[pos:]
        candidates = {
            r: [rc.c for rc in by_row[r] if rc in compatible and rc.c not in used_cols]
            for r in rest
        }
        if len(chosen) + _kuhn_bound(rest, candidates, used_cols) <= len(best):
            return
        if pos == len(rows):
            return
        r = rows[pos]
        for rc in by_row[r]:
            if rc in compatible and rc.c not in used_cols:
                chosen.append(rc)
                used_cols.add(rc.c)
                descend(pos + 1, chosen, used_cols, compatible & meets[rc])
                used_cols.discard(rc.c)
                chosen.pop()
        descend(pos + 1, chosen, used_cols, compatible)

    descend(0, [], set(), set(crossroads))
    stats = SolveStats(nodes=nodes, leaves=0, wall_seconds=time.monotonic() - start)
    return SolveResult(len(best), frozenset(best), Status.OPTIMAL, stats)
