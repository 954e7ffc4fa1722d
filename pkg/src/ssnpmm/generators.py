"""Finite-difference optimal-control instances and random test problems.

Control problems on the unit square with homogeneous Dirichlet data:

    min  1/2 ||y - y_d||^2 + alpha1 ||u||_1 + alpha2/2 ||u||^2
    s.t. state equation linking y and u,  u_a <= u <= u_b

discretized on ``N x N`` interior nodes with mesh width ``h = 1/(N+1)``,
lumped (diagonal) mass ``h^2 I`` and nodal quadrature for the l1 term. The
unknown is ``x = (y, u)`` with ``y`` free. Node ``(i, j)`` sits at
``((i+1) h, (j+1) h)`` and has index ``i + N j``.
"""
import dataclasses
import enum

import numpy as np
import scipy.sparse as sp

from .exceptions import ValidationError
from .problem import Problem


class Family(enum.Enum):
    POISSON = "poisson"
    CONVECTION_DIFFUSION = "convdiff"


@dataclasses.dataclass(frozen=True)
class ControlInstanceSpec:
    family: Family
    N: int
    alpha1: float = 1e-2
    alpha2: float = 1e-2
    epsilon: float = 0.02
    bounds: tuple = (-2.0, 1.5)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.N < 2:
            raise ValidationError("grid size N must be at least 2")
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValidationError("regularization weights must be nonnegative")
        if self.family is Family.CONVECTION_DIFFUSION and not self.epsilon > 0:
            raise ValidationError("diffusion coefficient must be positive")
        if self.bounds[0] > self.bounds[1]:
            raise ValidationError("lower control bound exceeds upper bound")

    @property
    def h(self):
        return 1.0 / (self.N + 1)


def grid_points(N):
    """Coordinates ``(x1, x2)`` of the interior nodes in index order."""
    t = np.arange(1, N + 1) / (N + 1)
    x1, x2 = np.meshgrid(t, t, indexing="xy")
    return x1.ravel(), x2.ravel()


def desired_state_poisson(x1, x2):
    return np.sin(np.pi * x1) * np.sin(np.pi * x2)


def desired_state_convdiff(x1, x2):
    return np.exp(-64.0 * ((x1 - 0.5) ** 2 + (x2 - 0.5) ** 2))


def wind(x1, x2):
    """Convective field ``(2 x2 (1 - x1)^2, -2 x1 (1 - x2^2))``."""
    return 2.0 * x2 * (1.0 - x1) ** 2, -2.0 * x1 * (1.0 - x2**2)


def laplacian_5pt(N):
    """Unscaled negative 5-point Laplacian ``kron(I, T) + kron(T, I)``, ``T = tridiag(-1, 2, -1)``."""
    T = sp.diags([-np.ones(N - 1), 2.0 * np.ones(N), -np.ones(N - 1)], [-1, 0, 1])
    I = sp.identity(N)
    return (sp.kron(I, T) + sp.kron(T, I)).tocsr()


def upwind_convection(N, h):
    """First-order upwind discretization of ``w . grad`` on interior nodes."""
    x1, x2 = grid_points(N)
    w1, w2 = wind(x1, x2)
    n = N * N
    k = np.arange(n)
    i, j = k % N, k // N
    rows, cols, vals = [k], [k], [(np.abs(w1) + np.abs(w2)) / h]
    for w, pos, stride in ((w1, i, 1), (w2, j, N)):
        back = (w > 0) & (pos > 0)
        fwd = (w < 0) & (pos < N - 1)
        rows += [k[back], k[fwd]]
        cols += [k[back] - stride, k[fwd] + stride]
        vals += [-w[back] / h, w[fwd] / h]
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def _assemble(spec, K, y_desired):
    N, h = spec.N, spec.h
    n_grid = N * N
    h2 = h * h
    I = sp.identity(n_grid, format="csr")
    A = sp.hstack([K, h2 * I]).tocsr()
    Q = sp.diags(np.concatenate([np.full(n_grid, h2), np.full(n_grid, spec.alpha2 * h2)])).tocsr()
    c = np.concatenate([-h2 * y_desired, np.zeros(n_grid)])
    d = np.concatenate([np.zeros(n_grid), np.full(n_grid, spec.alpha1 * h2)])
    ua, ub = spec.bounds
    l = np.concatenate([np.full(n_grid, -np.inf), np.full(n_grid, float(ua))])
    u = np.concatenate([np.full(n_grid, np.inf), np.full(n_grid, float(ub))])
    name = f"{spec.family.value}_N{N}"
    return Problem(Q, A, c, np.zeros(n_grid), d, l, u, name=name)


def gen_poisson_control(spec):
    """Poisson control: ``-Laplace(y) = u`` as ``[h^2 Laplace_h, h^2 I] x = 0``."""
    x1, x2 = grid_points(spec.N)
    K = -laplacian_5pt(spec.N)
    return _assemble(spec, K, desired_state_poisson(x1, x2))


def gen_convdiff_control(spec):
    """Convection-diffusion control: ``-eps Laplace(y) + w . grad(y) = u``.

    Rows are scaled by ``-h^2`` like the Poisson family, so
    ``K = -(eps L + h^2 C)`` with ``L`` the unscaled negative Laplacian and
    ``C`` the upwind convection matrix.
    """
    x1, x2 = grid_points(spec.N)
    h = spec.h
    K = -(spec.epsilon * laplacian_5pt(spec.N) + h * h * upwind_convection(spec.N, h))
    return _assemble(spec, K.tocsr(), desired_state_convdiff(x1, x2))


def generate(spec):
    if spec.family is Family.POISSON:
        return gen_poisson_control(spec)
    return gen_convdiff_control(spec)


def random_l1qp(rng, n, m, density=0.5, inf_fraction=0.3, l1_weight=1.0, name="random"):
    """Random feasible instance with a positive definite ``Q``.

    Bounds mix finite and infinite entries; ``b = A x_feas`` for a point
    strictly inside the box, so the equality-constrained set is nonempty.
    """
    R = rng.standard_normal((n, n))
    Q = R @ R.T / n + np.diag(rng.uniform(0.05, 1.05, n))
    A = rng.standard_normal((m, n)) * (rng.uniform(size=(m, n)) < max(density, 1.0 / n))
    for i in range(m):
        if not A[i].any():
            A[i, rng.integers(n)] = 1.0
    c = rng.standard_normal(n)
    d = l1_weight * rng.uniform(0.0, 1.0, n) * (rng.uniform(size=n) < 0.8)
    l = -rng.uniform(0.5, 2.0, n)
    u = rng.uniform(0.5, 2.0, n)
    l[rng.uniform(size=n) < inf_fraction] = -np.inf
    u[rng.uniform(size=n) < inf_fraction] = np.inf
    lo = np.where(np.isfinite(l), l, -1.0)
    hi = np.where(np.isfinite(u), u, 1.0)
    x_feas = lo + (hi - lo) * rng.uniform(0.2, 0.8, n)
    b = A @ x_feas
    return Problem(sp.csr_matrix(Q), sp.csr_matrix(A), c, b, d, l, u, name=name)
