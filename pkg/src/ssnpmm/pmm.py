"""Outer primal-dual proximal method of multipliers.

Each outer iteration approximately minimizes the proximal augmented
Lagrangian anchored at ``(x_k, y_k, z_k)`` with the semismooth Newton
solver, updates ``z`` in closed form, and adapts the penalties ``beta`` and
``rho``. Termination uses the scaled residuals of
:func:`ssnpmm.problem.kkt_residuals`.
"""
import dataclasses
import logging
import time

import numpy as np

from .config import SolverConfig
from .exceptions import LinearSolverError
from .precond import PreconditionerCache
from .problem import Solution, SolveReport, Status, kkt_residuals
from .ssn import SsnConfig, ssn_solve
from .subproblem import PenaltyState, PmmState, dist_F, residual_r, update_z
from .warmstart import warmstart_run

log = logging.getLogger(__name__)

FAST_FACTOR = 10.0
SLOW_FACTOR = 2.0
SUFFICIENT_DECREASE = 5.0
ZETA_SCALE = 10.0

__all__ = [
    "PenaltyState",
    "PmmState",
    "choose_zeta",
    "dist_F",
    "epsilon_schedule",
    "residual_r",
    "solve",
    "update_penalties",
    "update_z",
]


def _factor(now, prev):
    if now * SUFFICIENT_DECREASE <= prev:
        return FAST_FACTOR
    return SLOW_FACTOR


def update_penalties(s, res_now, res_prev):
    """Increase ``beta`` and ``rho`` according to residual progress.

    ``beta`` follows the primal side (equality and complementarity
    residuals), ``rho`` the dual residual. Each grows by 10 after a
    five-fold decrease and by 2 otherwise. ``rho`` is then clipped so that
    ``tau = beta / rho`` never increases and stays above ``tau_min``.
    """
    dual_now, dual_prev = res_now[0], res_prev[0]
    primal_now, primal_prev = max(res_now[1], res_now[2]), max(res_prev[1], res_prev[2])
    beta_new = min(s.beta * _factor(primal_now, primal_prev), s.beta_max)
    rho_new = s.rho * _factor(dual_now, dual_prev)
    rho_new = max(rho_new, s.rho * beta_new / s.beta)
    rho_new = min(rho_new, s.rho * s.beta_max / s.beta)
    rho_new = min(rho_new, beta_new / s.tau_min)
    return dataclasses.replace(s, beta=beta_new, rho=rho_new)


def epsilon_schedule(k, tol, x_step, beta, tau, delta0=1.0):
    """Sub-problem tolerance for outer iteration ``k``.

    ``(min(sqrt(tau), 1) / beta) * min(delta0 0.5^k, 0.5^(k+1) x_step)``,
    floored at ``0.1 tol``. ``x_step`` is the size of the previous outer
    step (``inf`` before the first one).
    """
    summable = delta0 * 0.5**k
    superlinear = 0.5 ** (k + 1) * x_step
    eps = min(np.sqrt(tau), 1.0) / beta * min(summable, superlinear)
    return float(max(eps, 0.1 * tol))


def choose_zeta(p, scale=ZETA_SCALE):
    """Natural-map step ``zeta = scale / max_i Q_ii``, constant over a run.

    The objective of discretized control problems carries the mesh factor
    ``h^2``; measuring ``zeta`` against the largest curvature keeps the prox
    argument ``x - zeta r`` on the scale of ``x`` whatever that factor is.
    Without positive curvature ``zeta = 1``.
    """
    qmax = float(p.Q.diagonal().max()) if p.n else 0.0
    if not qmax > 0.0:
        return 1.0
    return scale / qmax


def _same(a, b):
    return np.array_equal(a, b)


def step_norm(dx, dy, dz, tau):
    return float(np.sqrt(tau * (dx @ dx) + dy @ dy + dz @ dz))


def solve(p, cfg=None):
    """Solve an l1-regularized QP.

    Parameters
    ----------
    p : Problem
    cfg : SolverConfig, optional

    Returns
    -------
    Solution
        ``status`` is ``OPTIMAL`` when all three residuals are at most
        ``cfg.tol``.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    report = SolveReport(seed=cfg.seed)
    x, y, z = np.zeros(p.n), np.zeros(p.m), np.zeros(p.n)
    status = Status.MAX_ITERATIONS
    cache = PreconditionerCache()
    k = 0
    try:
        if cfg.warmstart and cfg.warmstart_maxit > 0:
            x, y, z, ws = warmstart_run(p, cfg.warmstart_tol, cfg.warmstart_maxit)
            report.warmstart_iters = ws.iterations
            report.warmstart_time_seconds = ws.time_seconds
        else:
            report.message = "warm start skipped"
        pen = PenaltyState(cfg.beta0, cfg.rho0, choose_zeta(p), cfg.beta_max, cfg.tau_min)
        ssn_cfg = SsnConfig(max_iters=cfg.max_ssn_per_subproblem, minres_maxit=cfg.minres_maxit)
        res = kkt_residuals(p, x, y, z)
        x_step = np.inf
        careful = False
        while True:
            if max(res) <= cfg.tol:
                status = Status.OPTIMAL
                break
            if k >= cfg.max_pmm:
                break
            eps = epsilon_schedule(k, cfg.tol, x_step, pen.beta, pen.tau, cfg.delta0)
            pen = dataclasses.replace(pen, eps_k=eps)
            s = PmmState(k, x, y, z, pen)
            x_new, y_new, st = ssn_solve(
                p, s, x, y, eps, ssn_cfg, cache, full_first_step=not careful
            )
            z_new = update_z(x_new, s, p)
            report.ssn_iters += st.iterations
            report.minres_calls += st.minres_calls
            report.minres_iters_total += st.minres_iters
            report.minres_unconverged += st.minres_unconverged
            report.linesearch_failures += st.linesearch_failures
            x_step = step_norm(x_new - x, y_new - y, z_new - z, pen.tau)
            res_new = kkt_residuals(p, x_new, y_new, z_new)
            log.debug(
                "pmm %d: beta=%.1e rho=%.1e eps=%.1e ssn=%d dist=%.1e res=%.1e %.1e %.1e",
                k, pen.beta, pen.rho, eps, st.iterations, st.dist, *res_new,
            )
            k += 1
            if _same(x_new, x) and _same(y_new, y) and _same(z_new, z):
                # the next call would repeat this one exactly
                if careful:
                    report.message = "no progress in the sub-problem"
                    break
                careful = True
                continue
            careful = False
            # raising the penalties on top of an unsolved sub-problem diverges
            if st.converged:
                pen = update_penalties(pen, res_new, res)
            x, y, z, res = x_new, y_new, z_new, res_new
    except LinearSolverError as exc:
        log.error("linear solver failure: %s", exc)
        status = Status.LINEAR_SOLVER_FAILURE
        report.message = str(exc)
    report.pmm_iters = k
    report.factorizations = cache.factorizations
    report.final_residuals = kkt_residuals(p, x, y, z)
    report.wall_time_seconds = time.perf_counter() - t0
    return Solution(x, y, z, status, report)
