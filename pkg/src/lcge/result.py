"""Outcome of a solve: objective, activated crossroads, status and statistics."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    FEASIBLE_TIMEOUT = "feasible_timeout"
    INFEASIBLE_MODEL = "infeasible_model"
    OUT_OF_MEMORY = "out_of_memory"

    def __str__(self) -> str:
        return self.value


@dataclass
class SolveStats:
    nodes: int = 0
    leaves: int = 0
    wall_seconds: float = 0.0
    max_open_nodes: int = 0


@dataclass(frozen=True)
class SolveResult:
    objective: int
    activated: frozenset
    status: Status
    stats: SolveStats = field(default_factory=SolveStats, compare=False)
