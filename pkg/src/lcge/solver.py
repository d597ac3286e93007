"""Exact branch-and-bound for the embedding ILP.

Every MES either spans two lines (two inner rows or two inner columns) or
belongs to a mixed pair.  Branching removes constraints until what is left
is a plain bipartite matching problem:

* two-line MES: one child forbids the first line's members, the other child
  forbids the second line's members; afterwards the constraint lies on a
  single line and is implied by the matching constraints,
* mixed pair: one child rejects the common crossroad, the other forces it
  and forbids the whole rectangle.

Each node is bounded by a maximum matching over the crossroads it still
allows.  When that matching happens to satisfy every MES it is optimal for
the subtree, so the node is closed without further branching.
"""

from __future__ import annotations

import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .chimera import ChimeraGraph, Crossroad
from .errors import PreconditionError
from .matching import adjacency_lists, hopcroft_karp
from .model import HEURISTIC, IlpModel, build_model
from .result import SolveResult, SolveStats, Status

DEFAULT_MEMORY_CAP = 2 << 30


@dataclass
class BranchNode:
    """Search node; ``allowed`` is the flat mask of crossroads not forced to zero.

    A crossroad forced to one is encoded by forbidding every other crossroad
    of its row and column, so each maximum matching of the node contains it.
    """

    allowed: np.ndarray
    forced_one: tuple = ()
    hint: tuple = ()

    @property
    def forced_zero(self) -> np.ndarray:
        return ~self.allowed


_ORDER = {Status.OPTIMAL: 0, Status.FEASIBLE_TIMEOUT: 1, Status.OUT_OF_MEMORY: 2}


class _Search:
    def __init__(self, model: IlpModel, deadline: float, memory_cap: int, shared=None):
        self.model = model
        self.n_rows = model.dims.n_rows
        self.n_cols = model.dims.n_cols
        self.size = self.n_rows * self.n_cols
        mes = model.mes
        self.indptr = mes.indptr
        self.indices = mes.indices
        self.starts = mes.indptr[:-1]
        self.group_of = mes.group_of
        self.groups = mes.mixed_groups
        self.sizes = mes.sizes()
        self.deadline = deadline
        self.max_open = max(1, memory_cap // max(1, self.size))
        self.shared = shared
        self.best = -1
        self.best_flat: list[int] = []
        self.stats = SolveStats()
        self.status = Status.OPTIMAL

    # incumbent ------------------------------------------------------------

    def _incumbent_value(self) -> int:
        if self.shared is not None:
            return max(self.best, self.shared.value)
        return self.best

    def _offer(self, flat: list[int]) -> None:
        if len(flat) > self.best:
            self.best = len(flat)
            self.best_flat = sorted(flat)
            if self.shared is not None:
                with self.shared.get_lock():
                    if self.shared.value < self.best:
                        self.shared.value = self.best

    # constraint evaluation -----------------------------------------------

    def _violated(self, flat: list[int]) -> np.ndarray:
        if len(self.sizes) == 0 or len(flat) < 2:
            return np.empty(0, dtype=np.int64)
        x = np.zeros(self.size, dtype=np.int8)
        x[flat] = 1
        counts = np.add.reduceat(x[self.indices], self.starts)
        return np.flatnonzero(counts > 1)

    def repair(self, flat: list[int], violated: np.ndarray | None = None) -> list[int]:
        """Drop activated crossroads until every MES holds."""
        if violated is None:
            violated = self._violated(flat)
        if len(violated) == 0:
            return list(flat)
        x = np.zeros(self.size, dtype=bool)
        x[flat] = True
        seg = [self.indices[self.indptr[i]:self.indptr[i + 1]] for i in violated]
        sub_idx = np.concatenate(seg)
        sub_ptr = np.zeros(len(seg) + 1, dtype=np.int64)
        np.cumsum([len(s) for s in seg], out=sub_ptr[1:])
        while True:
            hit = x[sub_idx]
            counts = np.add.reduceat(hit.astype(np.int64), sub_ptr[:-1])
            bad = counts > 1
            if not bad.any():
                break
            culprits = sub_idx[hit & np.repeat(bad, np.diff(sub_ptr))]
            freq = np.bincount(culprits, minlength=self.size)
            x[int(np.argmax(freq))] = False
        return np.flatnonzero(x).tolist()

    # search ---------------------------------------------------------------

    def matching(self, node: BranchNode) -> list[int]:
        allowed = node.allowed.reshape(self.n_rows, self.n_cols)
        adj = adjacency_lists(allowed)
        hint = [divmod(f, self.n_cols) for f in node.hint]
        match_l = hopcroft_karp(adj, self.n_cols, hint)
        return [r * self.n_cols + c for r, c in enumerate(match_l) if c >= 0]

    def root(self) -> BranchNode:
        return BranchNode(self.model.var_mask.ravel().copy())

    def expand(self, node: BranchNode) -> list[BranchNode] | None:
        """Evaluate one node; returns children (in processing order) or ``None`` if closed."""
        self.stats.nodes += 1
        flat = self.matching(node)
        if len(flat) <= self._incumbent_value():
            return None
        violated = self._violated(flat)
        if len(violated) == 0:
            self.stats.leaves += 1
            self._offer(flat)
            return None
        self._offer(self.repair(flat, violated))
        if len(flat) <= self._incumbent_value():
            return None
        return self._branch(node, flat, violated)

    def _branch(self, node: BranchNode, flat: list[int], violated: np.ndarray) -> list[BranchNode]:
        groups = self.group_of[violated]
        mixed = violated[groups >= 0]
        hint = tuple(flat)
        if len(mixed):
            group = self.groups[int(self.group_of[mixed[0]])]
            common = group.common
            reject = node.allowed.copy()
            reject[common] = False
            take = node.allowed.copy()
            take[group.rectangle] = False
            r, c = divmod(common, self.n_cols)
            take[r * self.n_cols:(r + 1) * self.n_cols] = False
            take[c::self.n_cols] = False
            take[common] = True
            return [
                BranchNode(reject, node.forced_one, hint),
                BranchNode(take, node.forced_one + (common,), hint),
            ]
        sizes = self.sizes[violated]
        target = int(violated[np.argmax(sizes)])
        members = self.indices[self.indptr[target]:self.indptr[target + 1]]
        rows = members // self.n_cols
        lines = rows if len(np.unique(rows)) == 2 else members % self.n_cols
        first = lines == lines[0]
        keep_first = node.allowed.copy()
        keep_first[members[~first]] = False
        keep_second = node.allowed.copy()
        keep_second[members[first]] = False
        return [BranchNode(keep_first, node.forced_one, hint), BranchNode(keep_second, node.forced_one, hint)]

    def run(self, stack: list[BranchNode]) -> None:
        while stack:
            if time.monotonic() >= self.deadline:
                self.status = Status.FEASIBLE_TIMEOUT
                return
            if len(stack) > self.max_open:
                self.status = Status.OUT_OF_MEMORY
                return
            children = self.expand(stack.pop())
            if children:
                stack.extend(reversed(children))
                self.stats.max_open_nodes = max(self.stats.max_open_nodes, len(stack))


def _initial_incumbent(search: _Search) -> None:
    root = search.root()
    flat = search.matching(root)
    search._offer(search.repair(flat))


# multiprocess workers -------------------------------------------------------

_WORKER: dict = {}


def _worker_init(model, deadline_wall, memory_cap, shared):
    _WORKER["args"] = (model, deadline_wall, memory_cap, shared)


def _worker_run(node: BranchNode, seed_best: int):
    model, deadline_wall, memory_cap, shared = _WORKER["args"]
    deadline = time.monotonic() + max(0.0, deadline_wall - time.time())
    search = _Search(model, deadline, memory_cap, shared)
    search.best = seed_best
    search.run([node])
    return search.best, search.best_flat, search.status, search.stats


def solve(
    model: IlpModel,
    budget: float = 3600.0,
    parallelism: int = 1,
    *,
    memory_cap: int = DEFAULT_MEMORY_CAP,
) -> SolveResult:
    """Solve ``model`` to optimality or until ``budget`` seconds have elapsed.

    With ``parallelism > 1`` the tree is split into subtrees solved by worker
    processes sharing the incumbent value; objective and status match the
    sequential run, only the statistics and possibly the attaining solution
    differ.
    """
    if not budget > 0:
        raise PreconditionError(f"budget must be positive, got {budget}")
    if parallelism < 1:
        raise PreconditionError(f"parallelism must be >= 1, got {parallelism}")
    start = time.monotonic()
    deadline = start + budget
    search = _Search(model, deadline, memory_cap)
    _initial_incumbent(search)
    stack = [search.root()]
    if parallelism == 1:
        search.run(stack)
        status = search.status
    else:
        status = _solve_parallel(search, stack, parallelism, budget - (time.monotonic() - start), memory_cap)
    search.stats.wall_seconds = time.monotonic() - start
    nc = model.dims.n_cols
    activated = frozenset(Crossroad(f // nc + 1, f % nc + 1) for f in search.best_flat)
    return SolveResult(len(activated), activated, status, search.stats)


def _solve_parallel(search: _Search, stack, workers: int, remaining: float, memory_cap: int) -> Status:
    # breadth-first split into enough independent subtrees
    frontier = list(stack)
    target = 4 * workers
    while frontier and len(frontier) < target and time.monotonic() < search.deadline:
        node = frontier.pop(0)
        children = search.expand(node)
        if children:
            frontier.extend(children)
    if time.monotonic() >= search.deadline and frontier:
        return Status.FEASIBLE_TIMEOUT
    if not frontier:
        return Status.OPTIMAL
    ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
    shared = ctx.Value("i", search.best)
    deadline_wall = time.time() + max(0.0, search.deadline - time.monotonic())
    status = Status.OPTIMAL
    with ProcessPoolExecutor(
        max_workers=workers,
        mp_context=ctx,
        initializer=_worker_init,
        initargs=(search.model, deadline_wall, memory_cap, shared),
    ) as pool:
        futures = [pool.submit(_worker_run, node, search.best) for node in frontier]
        for fut in futures:
            best, flat, sub_status, stats = fut.result()
            if best > search.best and len(flat) == best:
                search.best, search.best_flat = best, flat
            if _ORDER[sub_status] > _ORDER[status]:
                status = sub_status
            search.stats.nodes += stats.nodes
            search.stats.leaves += stats.leaves
            search.stats.max_open_nodes = max(search.stats.max_open_nodes, stats.max_open_nodes)
    return status


def solve_heuristic(
    g: ChimeraGraph, m: float, budget: float = 3600.0, parallelism: int = 1, **kwargs
) -> SolveResult:
    """Build the heuristic model with rectangle ratio ``m`` and solve it."""
    return solve(build_model(g, HEURISTIC, m), budget, parallelism, **kwargs)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LCGE_THREADS", "1")))
    except ValueError:
        return 1
