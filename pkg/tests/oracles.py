"""Independent reference implementations used by the tests.

Nothing here imports the solver internals; each oracle re-derives its result
from the problem data with a different algorithm or a dense formula.
"""
import itertools

import numba
import numpy as np
import scipy.linalg


def dense(M):
    return M.toarray() if hasattr(M, "toarray") else np.asarray(M, dtype=float)


# ----------------------------------------------------------- split-QP ADMM


@numba.njit(cache=True)
def _admm_loop(Kinv, P, q, G, lo, hi, rho, sigma, alpha, iters):
    nv = q.shape[0]
    nc = lo.shape[0]
    v = np.zeros(nv)
    z = np.zeros(nc)
    y = np.zeros(nc)
    rhs = np.empty(nv)
    for _ in range(iters):
        for i in range(nv):
            acc = sigma * v[i] - q[i]
            for j in range(nc):
                acc += G[j, i] * (rho[j] * z[j] - y[j])
            rhs[i] = acc
        vt = Kinv @ rhs
        zt = G @ vt
        for i in range(nv):
            v[i] = alpha * vt[i] + (1.0 - alpha) * v[i]
        for j in range(nc):
            zr = alpha * zt[j] + (1.0 - alpha) * z[j]
            zn = min(max(zr + y[j] / rho[j], lo[j]), hi[j])
            y[j] += rho[j] * (zr - zn)
            z[j] = zn
    return v, y


def split_qp_admm(p, iters=1_000_000, rho=1.0, sigma=1e-6, alpha=1.6):
    """Solve the l1-QP through its smooth reformulation with ADMM.

    ``x = v+ - v-`` with ``v+, v- >= 0`` turns ``||Dx||_1`` into the linear
    term ``d^T (v+ + v-)``; the resulting QP in ``v = (v+, v-)`` is solved by
    the operator-splitting iteration on ``Gv in [lo, hi]``, with the rows of
    ``G`` being ``[A, -A]`` (equalities), ``[I, -I]`` (box) and ``I``
    (signs). Equality rows get a 1e3 times larger penalty.

    Returns
    -------
    ndarray
        ``x`` after ``iters`` iterations.
    """
    n, m = p.n, p.m
    Q, A = dense(p.Q), dense(p.A)
    P = np.block([[Q, -Q], [-Q, Q]])
    q = np.concatenate([p.c + p.d, -p.c + p.d])
    I = np.eye(n)
    G = np.vstack([np.hstack([A, -A]), np.hstack([I, -I]), np.eye(2 * n)])
    lo = np.concatenate([p.b, p.l, np.zeros(2 * n)])
    hi = np.concatenate([p.b, p.u, np.full(2 * n, np.inf)])
    rho_v = np.full(G.shape[0], rho)
    rho_v[:m] *= 1e3
    K = P + sigma * np.eye(2 * n) + G.T @ (rho_v[:, None] * G)
    Kinv = scipy.linalg.inv(K)
    v, _ = _admm_loop(Kinv, P, q, G, lo, hi, rho_v, sigma, alpha, iters)
    return v[:n] - v[n:]


# ------------------------------------------------------ duplicate formulas


def soft(w, t, d):
    return np.sign(w) * np.maximum(np.abs(w) - t * d, 0.0)


def kkt_residuals(p, x, y, z):
    """Same three residuals, written out from the optimality conditions."""
    Q, A = dense(p.Q), dense(p.A)
    c, b = np.asarray(p.c), np.asarray(p.b)
    g = c + Q @ x - A.T @ y + z
    r1 = np.linalg.norm(x - soft(x - g, 1.0, p.d)) / (1 + np.linalg.norm(c))
    r2 = np.linalg.norm(A @ x - b) / (1 + np.linalg.norm(b))
    r3 = np.linalg.norm(x - np.minimum(np.maximum(x + z, p.l), p.u))
    r3 /= 1 + np.linalg.norm(x) + np.linalg.norm(z)
    return r1, r2, r3


def subproblem_residual(p, x, y, xk, zk, beta, rho):
    """``c + Qx - A^T y + z_k + beta x - beta Pi_K(z_k / beta + x) + (x - x_k) / rho``."""
    Q, A = dense(p.Q), dense(p.A)
    proj = np.minimum(np.maximum(zk / beta + x, p.l), p.u)
    return p.c + Q @ x - A.T @ y + zk + beta * x - beta * proj + (x - xk) / rho


def natural_map(p, x, y, xk, yk, zk, beta, rho, zeta):
    A = dense(p.A)
    r = subproblem_residual(p, x, y, xk, zk, beta, rho)
    top = x - soft(x - zeta * r, zeta, p.d)
    bottom = zeta * (A @ x + (y - yk) / beta - p.b)
    return np.concatenate([top, bottom])


def dist_F(p, x, y, xk, yk, zk, beta, rho):
    """Distance to zero of ``(r + dg(x), Ax + (y - y_k)/beta - b)``, per coordinate."""
    A = dense(p.A)
    r = subproblem_residual(p, x, y, xk, zk, beta, rho)
    top = np.empty_like(r)
    for i in range(p.n):
        if x[i] != 0.0:
            top[i] = r[i] + p.d[i] * np.sign(x[i])
        else:
            # min over v in [-d, d] of |r + v|
            top[i] = np.sign(r[i]) * max(abs(r[i]) - p.d[i], 0.0)
    bottom = A @ x + (y - yk) / beta - p.b
    return float(np.linalg.norm(np.concatenate([top, bottom])))


# ------------------------------------------------- dense sub-problem oracle


def solve_subproblem_dense(p, xk, yk, zk, beta, rho):
    """Exact sub-problem optimum by enumerating the piece of each coordinate.

    The sub-problem objective is a strongly convex piecewise quadratic; on
    each piece (``x_i`` below ``l``, inside, above ``u`` for the box term;
    negative, zero, positive for the l1 term) the optimality system is
    linear. Every combination is tried and the consistent one returned.
    Only for ``n <= 5``.
    """
    n, m = p.n, p.m
    Q, A = dense(p.Q), dense(p.A)
    for pieces in itertools.product(range(3), repeat=n):
        for signs in itertools.product((-1, 0, 1), repeat=n):
            sol = _solve_piece(p, Q, A, xk, yk, zk, beta, rho, pieces, signs)
            if sol is not None:
                x, y = sol
                if dist_F(p, x, y, xk, yk, zk, beta, rho) <= 1e-9:
                    return x, y
    raise RuntimeError("no consistent piece found")


def _solve_piece(p, Q, A, xk, yk, zk, beta, rho, pieces, signs):
    n, m = p.n, p.m
    # box term gradient: beta*(x - clip(zk/beta + x)) + zk
    # below l: zk + beta(x - l); inside: 0; above u: zk + beta(x - u)
    H = Q + np.eye(n) / rho
    g = p.c - xk / rho
    fixed = [i for i in range(n) if signs[i] == 0]
    for i in range(n):
        if pieces[i] == 0:
            if not np.isfinite(p.l[i]):
                return None
            H[i, i] += beta
            g[i] += zk[i] - beta * p.l[i]
        elif pieces[i] == 2:
            if not np.isfinite(p.u[i]):
                return None
            H[i, i] += beta
            g[i] += zk[i] - beta * p.u[i]
        if signs[i] != 0:
            g[i] += p.d[i] * signs[i]
    # unknowns x (free coordinates), y; x_i = 0 on fixed coordinates
    free = [i for i in range(n) if i not in fixed]
    nf = len(free)
    K = np.zeros((nf + m, nf + m))
    rhs = np.zeros(nf + m)
    K[:nf, :nf] = H[np.ix_(free, free)]
    K[:nf, nf:] = -A[:, free].T
    K[nf:, :nf] = A[:, free]
    K[nf:, nf:] = np.eye(m) / beta
    rhs[:nf] = -g[free]
    rhs[nf:] = p.b + yk / beta
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    x = np.zeros(n)
    x[free] = sol[:nf]
    y = sol[nf:]
    w = zk / beta + x
    for i in range(n):
        if pieces[i] == 0 and not w[i] <= p.l[i]:
            return None
        if pieces[i] == 1 and not p.l[i] <= w[i] <= p.u[i]:
            return None
        if pieces[i] == 2 and not w[i] >= p.u[i]:
            return None
        if signs[i] != 0 and not np.sign(x[i]) == signs[i]:
            return None
    return x, y


# ------------------------------------------------------- sequential pADMM


def padmm_sequential(p, x, y1, y2, w_next, sigma, gamma, sigma_hat):
    """One pADMM ``x`` step by direct minimization, then explicit dual updates.

    ``x+ = argmin c^T x + 1/2 x^T Q x - y1^T (Ax - b) + y2^T (x - w)
    + sigma/2 ||Ax - b||^2 + sigma/2 ||x - w||^2 + 1/2 ||x - x_old||_R^2``
    with ``R = sigma_hat I - Off(Q)``.
    """
    Q, A = dense(p.Q), dense(p.A)
    n = p.n
    R = sigma_hat * np.eye(n) - (Q - np.diag(np.diag(Q)))
    H = Q + sigma * A.T @ A + sigma * np.eye(n) + R
    g = -p.c + A.T @ y1 - y2 + sigma * A.T @ p.b + sigma * w_next + R @ x
    x_new = np.linalg.solve(H, g)
    y1_new = y1 - gamma * sigma * (A @ x_new - p.b)
    y2_new = y2 + gamma * sigma * (x_new - w_next)
    return x_new, y1_new, y2_new
