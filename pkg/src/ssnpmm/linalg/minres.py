"""Preconditioned MINRES for symmetric (possibly indefinite) systems."""
import dataclasses

import numpy as np

from ..exceptions import PreconditionerBreakdown

_EPS = np.finfo(float).eps


@dataclasses.dataclass
class MinresStats:
    """Outcome of one MINRES call.

    ``final_relative_residual`` and ``residuals`` are measured in the
    preconditioned norm ``||r||_{P^{-1}}`` relative to ``||rhs||_{P^{-1}}``.
    """

    iterations: int
    final_relative_residual: float
    converged: bool
    residuals: list = dataclasses.field(default_factory=list)


def _pinner(r, apply_Pinv):
    z = apply_Pinv(r)
    val = float(np.dot(r, z))
    if val < 0.0 or not np.isfinite(val):
        raise PreconditionerBreakdown(f"preconditioner inner product is {val!r}")
    return z, val


def minres(apply_M, apply_Pinv, rhs, tol=1e-8, maxit=200, x0=None):
    """Solve ``M s = rhs`` with MINRES and an SPD preconditioner.

    Parameters
    ----------
    apply_M : callable
        ``v -> M v`` for symmetric ``M``.
    apply_Pinv : callable
        ``v -> P^{-1} v`` for symmetric positive definite ``P``.
    rhs : ndarray
    tol : float
        Stop once ``||r||_{P^{-1}} <= tol * ||rhs||_{P^{-1}}``.
    maxit : int
    x0 : ndarray, optional
        Starting guess; zero by default.

    Returns
    -------
    s : ndarray
        Final (and best, the residual being monotone) iterate.
    stats : MinresStats

    Raises
    ------
    PreconditionerBreakdown
        If ``apply_Pinv`` yields a negative inner product.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    n = rhs.shape[0]
    _, bb = _pinner(rhs, apply_Pinv)
    bnorm = np.sqrt(bb)
    if x0 is None:
        x = np.zeros(n)
        r1 = rhs.copy()
    else:
        x = np.array(x0, dtype=np.float64)
        r1 = rhs - apply_M(x)
    if bnorm == 0.0:
        return np.zeros(n), MinresStats(0, 0.0, True, [0.0])

    y, beta1 = _pinner(r1, apply_Pinv)
    beta1 = np.sqrt(beta1)
    history = [beta1 / bnorm]
    if beta1 <= tol * bnorm:
        return x, MinresStats(0, beta1 / bnorm, True, history)

    oldb = 0.0
    beta = beta1
    dbar = 0.0
    epsln = 0.0
    phibar = beta1
    cs = -1.0
    sn = 0.0
    w = np.zeros(n)
    w2 = np.zeros(n)
    r2 = r1
    converged = False
    itn = 0
    while itn < maxit:
        itn += 1
        v = y / beta
        y = apply_M(v)
        if itn >= 2:
            y = y - (beta / oldb) * r1
        alfa = float(np.dot(v, y))
        y = y - (alfa / beta) * r2
        r1 = r2
        r2 = y
        y, bnext = _pinner(r2, apply_Pinv)
        oldb = beta
        beta = np.sqrt(bnext)

        oldeps = epsln
        delta = cs * dbar + sn * alfa
        gbar = sn * dbar - cs * alfa
        epsln = sn * beta
        dbar = -cs * beta
        gamma = max(np.hypot(gbar, beta), _EPS)
        cs = gbar / gamma
        sn = beta / gamma
        phi = cs * phibar
        phibar = sn * phibar

        w1 = w2
        w2 = w
        w = (v - oldeps * w1 - delta * w2) / gamma
        x = x + phi * w

        history.append(phibar / bnorm)
        if phibar <= tol * bnorm:
            converged = True
            break
        if beta == 0.0:
            # invariant Krylov subspace: x is exact up to rounding
            converged = True
            break
    return x, MinresStats(itn, phibar / bnorm, converged, history)
