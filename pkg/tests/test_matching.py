import itertools

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lcge.matching import EdgeMask, hopcroft_karp, max_matching


def brute_force_size(allowed: np.ndarray) -> int:
    n_rows, n_cols = allowed.shape
    best = 0

    def go(r, used, size):
        nonlocal best
        best = max(best, size)
        if r == n_rows or size + (n_rows - r) <= best:
            return
        for c in range(n_cols):
            if allowed[r, c] and c not in used:
                used.add(c)
                go(r + 1, used, size + 1)
                used.discard(c)
        go(r + 1, used, size)

    go(0, set(), 0)
    return best


def has_augmenting_path(allowed: np.ndarray, pairs) -> bool:
    """Alternating BFS from every free row; true if a free column is reachable."""
    n_rows, n_cols = allowed.shape
    row_of = {c - 1: r - 1 for r, c in pairs}
    col_of = {r - 1: c - 1 for r, c in pairs}
    frontier = [r for r in range(n_rows) if r not in col_of]
    seen_rows = set(frontier)
    seen_cols = set()
    while frontier:
        nxt = []
        for r in frontier:
            for c in np.flatnonzero(allowed[r]):
                c = int(c)
                if c in seen_cols or col_of.get(r) == c:
                    continue
                seen_cols.add(c)
                if c not in row_of:
                    return True
                r2 = row_of[c]
                if r2 not in seen_rows:
                    seen_rows.add(r2)
                    nxt.append(r2)
        frontier = nxt
    return False


masks = st.integers(1, 6).flatmap(
    lambda n_rows: st.integers(1, 6).flatmap(
        lambda n_cols: st.lists(
            st.booleans(), min_size=n_rows * n_cols, max_size=n_rows * n_cols
        ).map(lambda bits: np.array(bits, dtype=bool).reshape(n_rows, n_cols))
    )
)


def test_complete_mask():
    assert len(max_matching(EdgeMask.complete(12, 12))) == 12


def test_isolated_row():
    mask = EdgeMask.complete(12, 12)
    allowed = mask.allowed.copy()
    allowed[4, :] = False
    assert len(max_matching(EdgeMask(12, 12, allowed))) == 11


def test_needs_augmentation():
    m = max_matching(EdgeMask.from_pairs(2, 2, [(1, 1), (1, 2), (2, 1)]))
    assert m.pairs == {(1, 2), (2, 1)}


def test_deterministic():
    rng = np.random.default_rng(0)
    allowed = rng.random((10, 10)) < 0.3
    mask = EdgeMask(10, 10, allowed)
    assert max_matching(mask) == max_matching(mask)


def test_warm_start_ignores_invalid_pairs():
    mask = EdgeMask.from_pairs(3, 3, [(1, 1), (2, 2), (3, 3)])
    m = max_matching(mask, initial=[(1, 2), (1, 1), (2, 1), (3, 3)])
    assert m.pairs == {(1, 1), (2, 2), (3, 3)}


def test_rectangular_and_empty():
    assert len(max_matching(EdgeMask.complete(3, 7))) == 3
    assert len(max_matching(EdgeMask(4, 4, np.zeros((4, 4), dtype=bool)))) == 0
    assert hopcroft_karp([[], []], 0) == [-1, -1]


@settings(max_examples=300, deadline=None)
@given(masks)
def test_maximum_and_certified(allowed):
    n_rows, n_cols = allowed.shape
    m = max_matching(EdgeMask(n_rows, n_cols, allowed))
    rows = [r for r, _ in m.pairs]
    cols = [c for _, c in m.pairs]
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
    assert all(allowed[r - 1, c - 1] for r, c in m.pairs)
    assert len(m) == brute_force_size(allowed)
    assert not has_augmenting_path(allowed, m.pairs)


@settings(max_examples=150, deadline=None)
@given(masks, st.integers(0, 35))
def test_removing_edges_never_helps(allowed, drop):
    n_rows, n_cols = allowed.shape
    before = len(max_matching(EdgeMask(n_rows, n_cols, allowed)))
    smaller = allowed.copy()
    smaller.flat[drop % smaller.size] = False
    assert len(max_matching(EdgeMask(n_rows, n_cols, smaller))) <= before


def test_exhaustive_small_masks():
    # every 3x3 mask
    for bits in itertools.product([False, True], repeat=9):
        allowed = np.array(bits).reshape(3, 3)
        assert len(max_matching(EdgeMask(3, 3, allowed))) == brute_force_size(allowed)
