"""Maximum-cardinality bipartite matching of inner rows to inner columns."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_INF = 1 << 30


@dataclass(frozen=True, eq=False)
class EdgeMask:
    """Allowed row/column pairs; ``allowed[r-1, c-1]`` for 1-based ``(r, c)``."""

    n_rows: int
    n_cols: int
    allowed: np.ndarray

    def __post_init__(self):
        if self.allowed.shape != (self.n_rows, self.n_cols):
            raise ValueError(
                f"mask shape {self.allowed.shape} != ({self.n_rows}, {self.n_cols})"
            )

    @classmethod
    def from_pairs(cls, n_rows: int, n_cols: int, pairs: Iterable[tuple[int, int]]) -> "EdgeMask":
        allowed = np.zeros((n_rows, n_cols), dtype=bool)
        for r, c in pairs:
            allowed[r - 1, c - 1] = True
        return cls(n_rows, n_cols, allowed)

    @classmethod
    def complete(cls, n_rows: int, n_cols: int) -> "EdgeMask":
        return cls(n_rows, n_cols, np.ones((n_rows, n_cols), dtype=bool))

    def adjacency(self) -> list[list[int]]:
        return adjacency_lists(self.allowed)


@dataclass(frozen=True)
class Matching:
    pairs: frozenset

    def __len__(self) -> int:
        return len(self.pairs)


def adjacency_lists(allowed: np.ndarray) -> list[list[int]]:
    """0-based column lists per row, sorted ascending."""
    rows, cols = np.nonzero(allowed)
    adj: list[list[int]] = [[] for _ in range(allowed.shape[0])]
    for r, c in zip(rows.tolist(), cols.tolist()):
        adj[r].append(c)
    return adj


def hopcroft_karp(
    adj: Sequence[Sequence[int]], n_right: int, initial: Iterable[tuple[int, int]] = ()
) -> list[int]:
    """Hopcroft-Karp on 0-based adjacency lists.

    ``initial`` seeds the search with a partial matching; pairs that are not
    edges or that clash with earlier pairs are ignored.  Returns, for every
    left vertex, its matched right vertex or ``-1``.
    """
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    for l, r in initial:
        if match_l[l] == -1 and match_r[r] == -1 and r in adj[l]:
            match_l[l] = r
            match_r[r] = l

    dist = [0] * n_left
    while True:
        queue = deque()
        for l in range(n_left):
            if match_l[l] == -1:
                dist[l] = 0
                queue.append(l)
            else:
                dist[l] = _INF
        shortest = _INF
        while queue:
            l = queue.popleft()
            if dist[l] >= shortest:
                continue
            for r in adj[l]:
                l2 = match_r[r]
                if l2 == -1:
                    if shortest == _INF:
                        shortest = dist[l] + 1
                elif dist[l2] == _INF:
                    dist[l2] = dist[l] + 1
                    queue.append(l2)
        if shortest == _INF:
            return match_l

        cursor = [0] * n_left

        def augment(l: int) -> bool:
            edges = adj[l]
            while cursor[l] < len(edges):
                r = edges[cursor[l]]
                cursor[l] += 1
                l2 = match_r[r]
                if l2 == -1:
                    ok = dist[l] + 1 == shortest
                else:
                    ok = dist[l2] == dist[l] + 1 and augment(l2)
                if ok:
                    match_l[l] = r
                    match_r[r] = l
                    return True
            dist[l] = _INF
            return False

        for l in range(n_left):
            if match_l[l] == -1:
                augment(l)


def max_matching(mask: EdgeMask, initial: Iterable[tuple[int, int]] = ()) -> Matching:
    """A maximum matching of ``mask``; deterministic for a fixed mask."""
    seed = [(r - 1, c - 1) for r, c in initial]
    match_l = hopcroft_karp(mask.adjacency(), mask.n_cols, seed)
    return Matching(frozenset((l + 1, r + 1) for l, r in enumerate(match_l) if r >= 0))
