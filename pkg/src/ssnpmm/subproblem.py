"""State and residual maps of one proximal-multiplier sub-problem.

For anchors ``(x_k, y_k, z_k)`` and penalties ``beta, rho`` the sub-problem
optimality residual is

    r(x, y) = c + Qx - A^T y + (z_k + beta x) - beta Pi_K(z_k / beta + x)
              + (x - x_k) / rho

paired with the dual equation ``Ax + (y - y_k) / beta - b = 0``.
"""
import dataclasses

import numpy as np

from .prox import box_excess, project_subdiff_g


@dataclasses.dataclass(frozen=True)
class PenaltyState:
    """Penalty parameters of one outer iteration; ``tau = beta / rho``."""

    beta: float = 1e2
    rho: float = 5e2
    zeta: float = 1.0
    beta_max: float = 1e10
    tau_min: float = 1e-6
    eps_k: float = np.inf

    @property
    def tau(self):
        return self.beta / self.rho


@dataclasses.dataclass
class PmmState:
    """Anchor point ``(x_k, y_k, z_k)`` and penalties of the current sub-problem."""

    k: int
    x_k: np.ndarray
    y_k: np.ndarray
    z_k: np.ndarray
    penalties: PenaltyState


def residual_r(x, y, s, p):
    """Gradient-type residual ``r_{beta,rho}(x, y)`` of the sub-problem."""
    conj, _, _ = box_excess(s.z_k, s.penalties.beta, x, p.box)
    return p.c + p.Q @ x - p.A.T @ y + conj + (x - s.x_k) / s.penalties.rho


def primal_block(x, y, s, p):
    """``Ax + (y - y_k) / beta - b``."""
    return p.A @ x + (y - s.y_k) / s.penalties.beta - p.b


def dist_F(x, y, s, p):
    """Distance from zero to the sub-problem optimality set-valued map.

    Equals ``||(r + Pi_{dg(x)}(-r), Ax + (y - y_k)/beta - b)||``.
    """
    r = residual_r(x, y, s, p)
    top = r + project_subdiff_g(-r, x, p.d)
    bottom = primal_block(x, y, s, p)
    return float(np.sqrt(top @ top + bottom @ bottom))


def update_z(x_next, s, p):
    """Multiplier update ``z_k + beta x - beta Pi_K(z_k / beta + x)``.

    Mathematically equal to ``prox_conjugate_box(z_k + beta x, beta, K)``;
    the shifted form keeps full accuracy when ``beta`` is large.
    """
    z, _, _ = box_excess(s.z_k, s.penalties.beta, x_next, p.box)
    return z
