"""Sparse symmetric factorizations on top of the kernel backend."""
import dataclasses
import enum

import numpy as np
import scipy.sparse as sp

from ..exceptions import DimensionMismatch, FactorizationBreakdown, NotPositiveDefinite
from . import backend


class FactorKind(enum.Enum):
    CHOLESKY = "cholesky"
    LDLT = "ldlt"


@dataclasses.dataclass(frozen=True, eq=False)
class Factorization:
    """``P M P^T = L D L^T`` with unit lower-triangular ``L`` in CSC form.

    For ``kind == CHOLESKY`` every entry of ``D`` is positive, so
    ``L diag(sqrt(D))`` is the Cholesky factor of the permuted matrix.
    """

    kind: FactorKind
    perm: np.ndarray
    Lp: np.ndarray
    Li: np.ndarray
    Lx: np.ndarray
    D: np.ndarray
    n: int

    @property
    def nnz_L(self):
        return int(self.Lp[-1])

    def solve(self, r):
        r = np.asarray(r, dtype=np.float64)
        if r.shape != (self.n,):
            raise DimensionMismatch(f"rhs has shape {r.shape}, expected ({self.n},)")
        if self.n == 0:
            return np.zeros(0)
        rp = np.ascontiguousarray(r[self.perm])
        s = backend.kernels.ldl_solve(self.n, self.Lp, self.Li, self.Lx, self.D, rp)
        out = np.empty_like(s)
        out[self.perm] = s
        return out

    def inertia(self):
        """Return ``(n_positive, n_negative)`` pivot counts."""
        return int(np.sum(self.D > 0)), int(np.sum(self.D < 0))


def spmv(M, v):
    """Sparse (or dense) matrix-vector product with a shape check."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or M.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot multiply {M.shape} matrix by vector of shape {v.shape}")
    return np.asarray(M @ v, dtype=np.float64).reshape(M.shape[0])


def _as_square_csr(M):
    M = sp.csr_matrix(M, dtype=np.float64)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {M.shape}")
    return M


def fill_reducing_order(M):
    """Approximate minimum degree permutation for the pattern of ``M + M^T``."""
    M = _as_square_csr(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    pat = (abs(M) + abs(M.T)).tocsr()
    pat.sum_duplicates()
    pat.sort_indices()
    return backend.kernels.amd_order(
        n,
        np.ascontiguousarray(pat.indptr, dtype=np.int64),
        np.ascontiguousarray(pat.indices, dtype=np.int64),
    )


def _factorize(M, perm, require_positive):
    M = _as_square_csr(M)
    n = M.shape[0]
    if perm is None:
        perm = fill_reducing_order(M)
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (n,):
        raise DimensionMismatch(f"permutation has shape {perm.shape}, expected ({n},)")
    C = sp.triu(M[perm][:, perm], format="csc")
    C.sum_duplicates()
    C.sort_indices()
    Ap = np.ascontiguousarray(C.indptr, dtype=np.int64)
    Ai = np.ascontiguousarray(C.indices, dtype=np.int64)
    Ax = np.ascontiguousarray(C.data, dtype=np.float64)
    kern = backend.kernels
    parent, lnz = kern.etree(n, Ap, Ai)
    Lp, Li, Lx, D, info = kern.ldl_numeric(n, Ap, Ai, Ax, parent, lnz, require_positive)
    kind = FactorKind.CHOLESKY if require_positive else FactorKind.LDLT
    return Factorization(kind, perm, Lp, Li, Lx, D, n), int(info)


def factorize_spd(M, perm=None):
    """Cholesky-type factorization of a symmetric positive definite matrix.

    Raises
    ------
    NotPositiveDefinite
        If a pivot is nonpositive or non-finite.
    """
    fact, info = _factorize(M, perm, require_positive=True)
    if info >= 0:
        raise NotPositiveDefinite(
            f"nonpositive pivot {fact.D[info]!r} at elimination step {info}", column=info
        )
    return fact


def factorize_quasidef(M, perm=None):
    """LDL^T factorization of a symmetric quasi-definite matrix.

    Any symmetric permutation admits a factorization with diagonal ``D``, so the
    fill-reducing ordering is applied without pivoting.

    Raises
    ------
    FactorizationBreakdown
        If a pivot is exactly zero or non-finite.
    """
    fact, info = _factorize(M, perm, require_positive=False)
    if info >= 0:
        raise FactorizationBreakdown(
            f"zero or non-finite pivot {fact.D[info]!r} at elimination step {info}", column=info
        )
    return fact
