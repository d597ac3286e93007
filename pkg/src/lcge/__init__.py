"""Largest complete graph embeddings in Chimera graphs with broken vertices.

Typical use::

    from lcge import ChimeraGraph, build_model, solve, extract_embedding, verify_embedding

    g = ChimeraGraph.ideal(4)
    result = solve(build_model(g))
    report = verify_embedding(g, extract_embedding(g, result.activated))
"""

from .chimera import (
    ChimeraDims,
    ChimeraGraph,
    Cross,
    Crossroad,
    HorizontalVertex,
    VerticalVertex,
    available_crossroads,
    build_cross,
    crosses_meet,
    unit_cell_index,
)
from .constraints import (
    ConstraintSet,
    MesConstraint,
    generate_constraints,
    interval,
    mes_horizontal_pair,
    mes_mixed_pair,
    mes_vertical_pair,
)
from .embedding import Embedding, VerificationReport, extract_embedding, verify_embedding
from .errors import (
    BoundViolation,
    InvalidIndexError,
    LcgeError,
    ModelTooLarge,
    ParseError,
    PreconditionError,
    ValidationError,
)
from .instances import (
    InstanceSpec,
    SolutionRecord,
    generate,
    read_instance,
    read_solution,
    write_instance,
    write_solution,
)
from .matching import EdgeMask, Matching, max_matching
from .model import EXACT, HEURISTIC, IlpModel, ModelStats, build_model, export_lp, model_stats
from .oracle import OracleRefused, brute_force_optimum
from .result import SolveResult, SolveStats, Status
from .solver import solve, solve_heuristic

__version__ = "0.1.0"

__all__ = [
    "available_crossroads",
    "BoundViolation",
    "brute_force_optimum",
    "build_cross",
    "build_model",
    "ChimeraDims",
    "ChimeraGraph",
    "ConstraintSet",
    "Cross",
    "crosses_meet",
    "Crossroad",
    "EdgeMask",
    "Embedding",
    "EXACT",
    "export_lp",
    "extract_embedding",
    "generate",
    "generate_constraints",
    "HEURISTIC",
    "HorizontalVertex",
    "IlpModel",
    "InstanceSpec",
    "interval",
    "InvalidIndexError",
    "LcgeError",
    "Matching",
    "max_matching",
    "mes_horizontal_pair",
    "mes_mixed_pair",
    "mes_vertical_pair",
    "MesConstraint",
    "model_stats",
    "ModelStats",
    "ModelTooLarge",
    "OracleRefused",
    "ParseError",
    "PreconditionError",
    "read_instance",
    "read_solution",
    "SolutionRecord",
    "solve",
    "solve_heuristic",
    "SolveResult",
    "SolveStats",
    "Status",
    "unit_cell_index",
    "ValidationError",
    "VerificationReport",
    "verify_embedding",
    "VerticalVertex",
    "write_instance",
    "write_solution",
]
