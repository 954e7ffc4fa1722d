"""Sparse symmetric linear algebra: products, LDL^T/Cholesky, and MINRES."""
from .backend import BACKEND, compiled_available, get_kernels
from .factor import (
    FactorKind,
    Factorization,
    factorize_quasidef,
    factorize_spd,
    fill_reducing_order,
    spmv,
)
from .minres import MinresStats, minres

__all__ = [
    "BACKEND",
    "FactorKind",
    "Factorization",
    "MinresStats",
    "compiled_available",
    "factorize_quasidef",
    "factorize_spd",
    "fill_reducing_order",
    "get_kernels",
    "minres",
    "spmv",
]
