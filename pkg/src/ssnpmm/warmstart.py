"""Proximal ADMM used to produce a starting point for the outer solver.

The splitting is ``x = w`` with ``w`` carrying ``g`` and the box, so that

    w+  = Pi_K(prox_{g/sigma}(x + y2/sigma))

and the ``x`` step with proximal term ``R_x = sigma_hat I - Off(Q)`` is merged
with both dual updates into one quasi-definite system whose matrix does not
change between iterations.
"""
import dataclasses
import logging
import time

import numpy as np
import scipy.sparse as sp

from .linalg import factorize_quasidef
from .prox import project_box, project_subdiff_g, soft_threshold

log = logging.getLogger(__name__)

SIGMA = 1.0
GAMMA = 1.618


def choose_sigma_hat(Q):
    """Largest off-diagonal absolute row sum of ``Q`` plus ``1e-8``."""
    Q = sp.csr_matrix(Q)
    if Q.shape[0] == 0:
        return 1e-8
    off = abs(Q - sp.diags(Q.diagonal()))
    return float(np.max(np.asarray(off.sum(axis=1)).ravel())) + 1e-8


def off_diagonal(Q):
    Q = sp.csr_matrix(Q)
    return (Q - sp.diags(Q.diagonal())).tocsr()


@dataclasses.dataclass
class AdmmState:
    x: np.ndarray
    w: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    sigma: float
    gamma: float
    sigma_hat: float
    kkt_factor: object = None


@dataclasses.dataclass
class AdmmStats:
    iterations: int = 0
    converged: bool = False
    residuals: tuple = (np.inf, np.inf, np.inf)
    factorizations: int = 0
    time_seconds: float = 0.0


def merged_matrix(p, sigma, gamma, sigma_hat):
    """Quasi-definite matrix of the merged ``x`` step and dual updates."""
    n, m = p.n, p.m
    gs = 1.0 / (gamma * sigma)
    I_n = sp.identity(n, format="csr")
    return sp.bmat(
        [
            [sp.diags(-gamma * (p.Q.diagonal() + sigma_hat)), p.A.T, -I_n],
            [p.A, sp.identity(m) * gs, None],
            [-I_n, None, I_n * gs],
        ],
        format="csr",
    )


def init_state(p, sigma=SIGMA, gamma=GAMMA, start=None):
    """Zero (or given) starting point with the merged system factorized."""
    sigma_hat = choose_sigma_hat(p.Q)
    K = merged_matrix(p, sigma, gamma, sigma_hat)
    factor = factorize_quasidef(K)
    if start is None:
        x, y1, y2 = np.zeros(p.n), np.zeros(p.m), np.zeros(p.n)
    else:
        x, y1, y2 = (np.array(v, dtype=np.float64) for v in start)
    return AdmmState(x, x.copy(), y1, y2, sigma, gamma, sigma_hat, factor)


def admm_w_update(x, y2, sigma, p):
    return project_box(soft_threshold(x + y2 / sigma, 1.0 / sigma, p.d), p.box)


def merged_rhs(state, w_next, p):
    g, gs = state.gamma, state.gamma * state.sigma
    x, y1, y2 = state.x, state.y1, state.y2
    Rx_x = state.sigma_hat * x - off_diagonal(p.Q) @ x
    top = g * (p.c - Rx_x) + (1.0 - g) * (p.A.T @ y1 - y2)
    return np.concatenate([top, p.b + y1 / gs, y2 / gs - w_next])


def admm_xy_update(state, w_next, p):
    """Return ``(x, y1, y2)`` after the merged solve."""
    n, m = p.n, p.m
    sol = state.kkt_factor.solve(merged_rhs(state, w_next, p))
    return sol[:n], sol[n : n + m], sol[n + m :]


def admm_residuals(p, x, w, y1, y2):
    """Scaled stationarity, feasibility, and ``w``-optimality residuals."""
    r1 = np.linalg.norm(p.c + p.Q @ x - p.A.T @ y1 + y2) / (1.0 + np.linalg.norm(p.c))
    feas = np.concatenate([p.A @ x - p.b, w - x])
    r2 = np.linalg.norm(feas) / (1.0 + np.linalg.norm(p.b))
    prox = project_box(soft_threshold(w + y2, 1.0, p.d), p.box)
    r3 = np.linalg.norm(w - prox) / (1.0 + np.linalg.norm(w) + np.linalg.norm(y2))
    return float(r1), float(r2), float(r3)


def warmstart_run(p, tol_ws=1e-3, max_iters=400, sigma=SIGMA, gamma=GAMMA, start=None):
    """Run pADMM and return ``(x, y, z, stats)`` from its best iterate.

    ``z = y2 - Pi_{dg(w)}(y2)`` is recovered from the dual of the splitting.
    The best iterate is the one with the smallest maximal residual.
    """
    t0 = time.perf_counter()
    state = init_state(p, sigma, gamma, start)
    stats = AdmmStats(factorizations=1)

    def snapshot():
        return state.x.copy(), state.w.copy(), state.y1.copy(), state.y2.copy()

    if start is not None:
        best_res = admm_residuals(p, state.x, state.w, state.y1, state.y2)
        best = snapshot()
    else:
        best_res, best = (np.inf,) * 3, None
    while max(best_res) > tol_ws and stats.iterations < max_iters:
        w = admm_w_update(state.x, state.y2, state.sigma, p)
        x, y1, y2 = admm_xy_update(state, w, p)
        state.x, state.w, state.y1, state.y2 = x, w, y1, y2
        stats.iterations += 1
        res = admm_residuals(p, x, w, y1, y2)
        if max(res) < max(best_res):
            best_res, best = res, snapshot()
    x, w, y1, y2 = best if best is not None else snapshot()
    z = y2 - project_subdiff_g(y2, w, p.d)
    stats.residuals = best_res
    stats.converged = max(best_res) <= tol_ws
    stats.time_seconds = time.perf_counter() - t0
    log.info(
        "warm start: %d iterations, residuals %.2e %.2e %.2e",
        stats.iterations,
        *best_res,
    )
    return x, y1, z, stats
