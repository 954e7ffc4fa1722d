"""Sparse solver for l1-regularized convex QPs with equality and box constraints.

Solves ``min c^T x + 1/2 x^T Q x + ||D x||_1`` subject to ``A x = b`` and
``l <= x <= u`` with a proximal method of multipliers whose sub-problems are
handled by a semismooth Newton method with preconditioned MINRES.
"""
from .config import SolverConfig
from .exceptions import (
    DimensionMismatch,
    IoError,
    LinearSolverError,
    ParseError,
    SsnPmmError,
    TooLarge,
    ValidationError,
)
from .generators import ControlInstanceSpec, Family, generate, random_l1qp
from .pmm import solve
from .problem import (
    Problem,
    Solution,
    SolveReport,
    Status,
    kkt_residuals,
    load_problem,
    load_solution,
    save_problem,
    save_solution,
)

__version__ = "0.1.0"

__all__ = [
    "ControlInstanceSpec",
    "DimensionMismatch",
    "Family",
    "IoError",
    "LinearSolverError",
    "ParseError",
    "Problem",
    "Solution",
    "SolveReport",
    "SolverConfig",
    "SsnPmmError",
    "Status",
    "TooLarge",
    "ValidationError",
    "generate",
    "kkt_residuals",
    "load_problem",
    "load_solution",
    "random_l1qp",
    "save_problem",
    "save_solution",
    "solve",
]
