"""Semismooth Newton solver for one proximal-multiplier sub-problem.

The sub-problem is solved through the natural map

    F(x, y) = (x - prox_{zeta g}(u),  zeta (Ax + (y - y_k)/beta - b)),
    u = x - zeta r(x, y),

whose squared norm is the line-search merit. Each Newton system is reduced
to the coordinates where the prox is differentiable with unit slope (the set
``B-hat``) and solved with preconditioned MINRES.
"""
import dataclasses
import logging

import numpy as np
import scipy.sparse as sp

from .exceptions import LineSearchFailure, ValidationError
from .linalg import minres
from .precond import build_preconditioner
from .prox import box_excess, soft_threshold
from .subproblem import dist_F, primal_block, residual_r

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class ActiveSets:
    """Clarke-Jacobian selections.

    ``b_mask[i]`` marks ``z_k,i / beta + x_i`` strictly inside ``(l_i, u_i)``;
    ``bhat_mask[i]`` marks ``|u_i| > zeta d_i`` or ``d_i == 0``.
    """

    b_mask: np.ndarray
    bhat_mask: np.ndarray

    @property
    def bhat_indices(self):
        return np.flatnonzero(self.bhat_mask)

    @property
    def nhat_indices(self):
        return np.flatnonzero(~self.bhat_mask)


@dataclasses.dataclass(frozen=True)
class SsnConfig:
    eta1: float = 0.1
    eta2: float = 0.5
    mu: float = 1e-4
    delta: float = 0.5
    max_iters: int = 8
    max_linesearch: int = 30
    minres_maxit: int = 200
    minres_restarts: int = 2

    def __post_init__(self):
        if not 0.0 < self.eta1 < 1.0:
            raise ValidationError("eta1 must lie in (0, 1)")
        if not 0.0 < self.eta2 <= 1.0:
            raise ValidationError("eta2 must lie in (0, 1]")
        if not 0.0 < self.mu < 0.5:
            raise ValidationError("mu must lie in (0, 1/2)")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("delta must lie in (0, 1)")
        if self.max_iters < 1 or self.max_linesearch < 1 or self.minres_maxit < 1:
            raise ValidationError("iteration caps must be positive")


@dataclasses.dataclass
class SsnStats:
    iterations: int = 0
    minres_calls: int = 0
    minres_iters: int = 0
    minres_unconverged: int = 0
    linesearch_failures: int = 0
    converged: bool = False
    dist: float = np.inf
    thetas: list = dataclasses.field(default_factory=list)


def natural_map(x, y, s, p):
    """Return ``(F, u)``: the stacked natural map and the prox argument."""
    zeta = s.penalties.zeta
    r = residual_r(x, y, s, p)
    u_hat = x - zeta * r
    top = x - soft_threshold(u_hat, zeta, p.d)
    bottom = zeta * primal_block(x, y, s, p)
    return np.concatenate([top, bottom]), u_hat


def build_active_sets(x, z_k, u_hat, s, p):
    zeta = s.penalties.zeta
    # z_k / beta + x in (l, u), tested in the shifted form used by the residual
    _, t_u, t_l = box_excess(z_k, s.penalties.beta, x, p.box)
    b_mask = (t_u < 0.0) & (t_l > 0.0)
    bhat_mask = (np.abs(u_hat) > zeta * p.d) | (p.d == 0.0)
    return ActiveSets(b_mask, bhat_mask)


def _h_shift(sets, penalties):
    return 1.0 / penalties.rho + penalties.beta * ~sets.b_mask


@dataclasses.dataclass(frozen=True, eq=False)
class NewtonSystem:
    """Reduced quasi-definite system ``[[-H_BB, A_B^T], [A_B, I/beta]] s = rhs``.

    ``d_xN`` is the eliminated step on the complement of ``B-hat``.
    """

    sets: ActiveSets
    H_BB: sp.csr_matrix
    A_B: sp.csr_matrix
    beta: float
    zeta: float
    rhs: np.ndarray
    d_xN: np.ndarray

    @property
    def nb(self):
        return self.H_BB.shape[0]

    def matvec(self, v):
        nb = self.nb
        vx, vy = v[:nb], v[nb:]
        top = -(self.H_BB @ vx) + self.A_B.T @ vy
        bottom = self.A_B @ vx + vy / self.beta
        return np.concatenate([top, bottom])

    def to_dense(self):
        m = self.A_B.shape[0]
        Ad = self.A_B.toarray()
        return np.block([[-self.H_BB.toarray(), Ad.T], [Ad, np.eye(m) / self.beta]])

    def expand(self, sol):
        """Map a reduced solution to the full step ``(d_x, d_y)``."""
        sets = self.sets
        dx = np.empty(sets.b_mask.shape[0])
        dx[sets.bhat_indices] = sol[: self.nb]
        dx[sets.nhat_indices] = self.d_xN
        return dx, sol[self.nb :].copy()


def assemble_newton(x, y, sets, s, p, F=None):
    """Build the reduced Newton system at ``(x, y)``.

    ``F`` may be passed to avoid re-evaluating the natural map.
    """
    pen = s.penalties
    zeta = pen.zeta
    if F is None:
        F, _ = natural_map(x, y, s, p)
    n = p.n
    F1, F2 = F[:n], F[n:]
    B = sets.bhat_indices
    N = sets.nhat_indices
    H_BB = (p.Q[B][:, B] + sp.diags(_h_shift(sets, pen)[B])).tocsr()
    A_B = p.A[:, B].tocsr()
    d_xN = -F1[N]
    dN = np.zeros(n)
    dN[N] = d_xN
    # only Q couples B with N; the diagonal shift of H lives on N alone
    rhs1 = F1[B] / zeta + (p.Q @ dN)[B]
    rhs2 = -F2 / zeta - p.A @ dN
    return NewtonSystem(sets, H_BB, A_B, pen.beta, zeta, np.concatenate([rhs1, rhs2]), d_xN)


def full_jacobian(sets, s, p):
    """Sparse generalized Jacobian of the natural map for the given selections."""
    pen = s.penalties
    zeta = pen.zeta
    n, m = p.n, p.m
    bh = sets.bhat_mask.astype(np.float64)
    H = (p.Q + sp.diags(_h_shift(sets, pen))).tocsr()
    Bh = sp.diags(bh)
    top_left = sp.diags(1.0 - bh) + zeta * (Bh @ H)
    top_right = -zeta * (Bh @ p.A.T)
    bottom = sp.hstack([zeta * p.A, sp.identity(m) * (zeta / pen.beta)])
    return sp.vstack([sp.hstack([top_left, top_right]), bottom]).tocsr()


def solve_newton(system, pre, F_norm, cfg, stats):
    """Solve the reduced system to the inexactness ``min(eta1, ||F||^{1+eta2})``.

    MINRES runs with relative tolerance ``target / (2 ||F||)``; the true
    residual is then checked and MINRES is resumed with a halved tolerance
    (at most ``cfg.minres_restarts`` times) while the target is missed.
    """
    nb, rhs = system.nb, system.rhs
    if nb == 0:
        return system.expand(system.beta * rhs)
    target = min(cfg.eta1, F_norm ** (1.0 + cfg.eta2))
    tol = target / (2.0 * F_norm)
    sol, st = minres(system.matvec, pre.apply, rhs, tol=tol, maxit=cfg.minres_maxit)
    iters = st.iterations
    for _ in range(cfg.minres_restarts):
        true_res = system.zeta * np.linalg.norm(system.matvec(sol) - rhs)
        if true_res <= target:
            break
        tol *= 0.5
        sol, st = minres(system.matvec, pre.apply, rhs, tol=tol, maxit=cfg.minres_maxit, x0=sol)
        iters += st.iterations
    stats.minres_calls += 1
    stats.minres_iters += iters
    if not st.converged:
        stats.minres_unconverged += 1
    return system.expand(sol)


def _keep_halving(trial, x, y, dx, dy, theta, s, p, cfg):
    """Halve an accepted step while the merit keeps dropping."""
    for _ in range(cfg.max_linesearch):
        alpha = trial[0] * cfg.delta
        xt, yt = x + alpha * dx, y + alpha * dy
        Ft, ut = natural_map(xt, yt, s, p)
        th = float(Ft @ Ft)
        if th >= trial[5]:
            break
        trial = (alpha, xt, yt, Ft, ut, th)
    return trial


def line_search(x, y, dx, dy, theta, s, p, cfg):
    """Backtrack on ``Theta = ||F||^2`` until ``Theta_new <= (1 - 2 mu alpha) Theta``.

    Once a step passes the test it is halved further for as long as the
    merit keeps dropping. Near kinks of the prox the full step often passes
    the test barely while a shorter one lands much closer to the root.

    Returns
    -------
    tuple
        ``(alpha, x, y, F, u_hat, theta)`` at the accepted point.

    Raises
    ------
    LineSearchFailure
        After ``cfg.max_linesearch`` trials; ``exc.best`` holds the trial
        with the smallest merit.
    """
    best = None
    alpha = 1.0
    for _ in range(cfg.max_linesearch):
        xt, yt = x + alpha * dx, y + alpha * dy
        Ft, ut = natural_map(xt, yt, s, p)
        th = float(Ft @ Ft)
        trial = (alpha, xt, yt, Ft, ut, th)
        if th <= (1.0 - 2.0 * cfg.mu * alpha) * theta:
            return _keep_halving(trial, x, y, dx, dy, theta, s, p, cfg)
        if best is None or th < best[5]:
            best = trial
        alpha *= cfg.delta
    exc = LineSearchFailure(f"no sufficient decrease after {cfg.max_linesearch} trials")
    exc.best = best
    raise exc


def ssn_solve(p, s, x0, y0, eps, cfg=None, cache=None, full_first_step=True):
    """Approximately solve the sub-problem anchored at ``s`` from ``(x0, y0)``.

    Stops at the first iterate with ``dist_F <= eps`` or after
    ``cfg.max_iters`` Newton steps. The first step is taken in full unless
    ``full_first_step`` is false; later steps are globalized by backtracking on ``||F||^2``. When backtracking
    fails, the trial with the smallest merit is taken if it improves on the
    current point; otherwise the call ends. The returned iterate is the one
    with the smallest ``dist_F`` seen during the call.

    Returns
    -------
    x, y : ndarray
    stats : SsnStats
    """
    cfg = cfg or SsnConfig()
    stats = SsnStats()
    x = np.array(x0, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    F, u_hat = natural_map(x, y, s, p)
    theta = float(F @ F)
    stats.thetas.append(theta)
    best = None
    while True:
        stats.dist = dist_F(x, y, s, p)
        if best is None or stats.dist < best[2]:
            best = (x, y, stats.dist)
        if stats.dist <= eps:
            stats.converged = True
            break
        if stats.iterations >= cfg.max_iters or theta == 0.0:
            break
        sets = build_active_sets(x, s.z_k, u_hat, s, p)
        system = assemble_newton(x, y, sets, s, p, F)
        pre = build_preconditioner(p, sets, s, cache)
        dx, dy = solve_newton(system, pre, np.sqrt(theta), cfg, stats)
        if stats.iterations == 0 and full_first_step:
            x, y = x + dx, y + dy
            F, u_hat = natural_map(x, y, s, p)
            theta = float(F @ F)
        else:
            try:
                _, x, y, F, u_hat, theta = line_search(x, y, dx, dy, theta, s, p, cfg)
            except LineSearchFailure as exc:
                stats.linesearch_failures += 1
                log.debug("line search failed at SSN iteration %d", stats.iterations)
                if exc.best[5] >= theta:
                    # no trial improved the merit; the direction is useless here
                    stats.iterations += 1
                    break
                _, x, y, F, u_hat, theta = exc.best
        stats.iterations += 1
        stats.thetas.append(theta)
    # the unguarded first step may leave the call worse off than it started
    x, y, stats.dist = best
    return x, y, stats
