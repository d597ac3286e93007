"""Shared builders for tests."""

import random

from lcge.chimera import ChimeraDims, ChimeraGraph, HorizontalVertex, VerticalVertex


def all_vertices(dims: ChimeraDims) -> list:
    hs = [HorizontalVertex(r, j) for r in range(1, dims.n_rows + 1) for j in range(1, dims.cell_cols + 1)]
    vs = [VerticalVertex(i, c) for i in range(1, dims.cell_rows + 1) for c in range(1, dims.n_cols + 1)]
    return hs + vs


def graph_with(dims: ChimeraDims, broken) -> ChimeraGraph:
    broken = list(broken)
    return ChimeraGraph(
        dims,
        [x for x in broken if isinstance(x, HorizontalVertex)],
        [x for x in broken if isinstance(x, VerticalVertex)],
    )


def random_graph(rng: random.Random, s: int, d: int, k: int, cols: int | None = None) -> ChimeraGraph:
    dims = ChimeraDims(s, cols or s, d)
    pool = all_vertices(dims)
    return graph_with(dims, rng.sample(pool, min(k, len(pool))))


def random_suite(seed: int, count: int, shapes, max_broken: int, min_broken: int = 1):
    """``count`` reproducible random graphs cycling through ``shapes`` of (s, d)."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        s, d = shapes[i % len(shapes)]
        out.append(random_graph(rng, s, d, rng.randint(min_broken, max_broken)))
    return out
