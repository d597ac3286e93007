"""Chains from activated crossroads, and an independent embedding verifier.

The verifier works on raw vertex sets and recomputes Chimera adjacency from
lattice coordinates.  It deliberately avoids the cross construction helpers
so that a mistake there cannot hide a broken embedding.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

from .chimera import ChimeraGraph, Cross, Crossroad, HorizontalVertex, VerticalVertex, build_cross
from .errors import PreconditionError

OVERLAP = "overlap"
DISCONNECTED = "disconnected"
BROKEN_VERTEX_USED = "broken_vertex_used"
PAIR_NOT_CONNECTED = "pair_not_connected"


@dataclass(frozen=True)
class Embedding:
    chains: tuple

    def __len__(self) -> int:
        return len(self.chains)

    @property
    def crossroads(self) -> list[Crossroad]:
        return [chain.crossroad for chain in self.chains]


@dataclass(frozen=True)
class Failure:
    kind: str
    chains: tuple
    detail: str


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    clique_size: int
    failures: tuple

    def summary(self) -> str:
        if self.valid:
            return f"valid embedding of K_{self.clique_size}"
        lines = [f"invalid embedding ({len(self.failures)} failures)"]
        lines += [f"  {f.kind} chains={list(f.chains)}: {f.detail}" for f in self.failures]
        return "\n".join(lines)


def extract_embedding(g: ChimeraGraph, activated: Iterable) -> Embedding:
    """One maximal cross per activated crossroad, ordered by inner row."""
    crossroads = sorted(Crossroad(*rc) for rc in activated)
    rows = [rc.r for rc in crossroads]
    cols = [rc.c for rc in crossroads]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise PreconditionError("activated crossroads must use distinct rows and columns")
    return Embedding(tuple(build_cross(g, rc) for rc in crossroads))


def _in_lattice(g: ChimeraGraph, x) -> bool:
    dims = g.dims
    if isinstance(x, HorizontalVertex):
        return 1 <= x.r <= dims.n_rows and 1 <= x.cell_col <= dims.cell_cols
    return 1 <= x.cell_row <= dims.cell_rows and 1 <= x.c <= dims.n_cols


def _neighbours(g: ChimeraGraph, x) -> list:
    d = g.dims.depth
    if isinstance(x, HorizontalVertex):
        r, j = x
        cell_row = (r + d - 1) // d
        out = [HorizontalVertex(r, j - 1), HorizontalVertex(r, j + 1)]
        out += [VerticalVertex(cell_row, c) for c in range(d * (j - 1) + 1, d * j + 1)]
    else:
        i, c = x
        cell_col = (c + d - 1) // d
        out = [VerticalVertex(i - 1, c), VerticalVertex(i + 1, c)]
        out += [HorizontalVertex(r, cell_col) for r in range(d * (i - 1) + 1, d * i + 1)]
    return [y for y in out if _in_lattice(g, y) and not g.is_broken(y)]


def verify_embedding(g: ChimeraGraph, e: Embedding) -> VerificationReport:
    """Check that the chains of ``e`` form a complete-graph minor of ``g``.

    Reports every failure found, not just the first.
    """
    failures: list[Failure] = []
    usable: list[set] = []
    for idx, chain in enumerate(e.chains):
        vertices = set(chain.horizontal) | set(chain.vertical)
        bad = sorted(tuple(x) for x in vertices if not _in_lattice(g, x) or g.is_broken(x))
        if bad:
            failures.append(Failure(BROKEN_VERTEX_USED, (idx,), f"unusable vertices {bad}"))
        ok = {x for x in vertices if _in_lattice(g, x) and not g.is_broken(x)}
        usable.append(ok)
        if not ok or not _connected(g, ok):
            failures.append(Failure(DISCONNECTED, (idx,), f"chain of {len(vertices)} vertices is not connected"))

    owner: dict = {}
    for idx, chain in enumerate(e.chains):
        for x in set(chain.horizontal) | set(chain.vertical):
            owner.setdefault(x, []).append(idx)
    clashes: dict[tuple, list] = {}
    for x, owners in owner.items():
        for pair in combinations(owners, 2):
            clashes.setdefault(pair, []).append(tuple(x))
    for pair in sorted(clashes):
        failures.append(Failure(OVERLAP, pair, f"shared vertices {sorted(clashes[pair])}"))

    reach = [set().union(*(_neighbours(g, x) for x in vs)) if vs else set() for vs in usable]
    for i, j in combinations(range(len(e.chains)), 2):
        if reach[i].isdisjoint(usable[j]):
            failures.append(Failure(PAIR_NOT_CONNECTED, (i, j), "no edge joins the two chains"))

    return VerificationReport(
        valid=not failures,
        clique_size=len(e.chains) if not failures else 0,
        failures=tuple(failures),
    )


def _connected(g: ChimeraGraph, vertices: set) -> bool:
    start = next(iter(vertices))
    seen = {start}
    queue = deque([start])
    while queue:
        for y in _neighbours(g, queue.popleft()):
            if y in vertices and y not in seen:
                seen.add(y)
                queue.append(y)
    return len(seen) == len(vertices)


def chain_from_vertices(crossroad, horizontal, vertical) -> Cross:
    """A chain from explicit vertex coordinates, e.g. read from a file."""
    return Cross(
        crossroad=Crossroad(*crossroad),
        horizontal=frozenset(HorizontalVertex(*x) for x in horizontal),
        vertical=frozenset(VerticalVertex(*x) for x in vertical),
    )
