"""Block-diagonal preconditioner for the reduced Newton system.

The reduced operator is

    M = [[-H_BB, A_B^T],
         [ A_B,  I/beta]]

and the preconditioner is ``blkdiag(Diag(H_BB), S)`` with the sparse Schur
approximation ``S = A_B E A_B^T + I/beta``. ``E`` keeps ``1/H_ii`` only for
indices that are also strictly inside the box and drops the rest, whose
diagonal carries the large ``beta`` shift anyway.
"""
import dataclasses
import logging

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .exceptions import TooLarge
from .linalg import factorize_spd, fill_reducing_order

log = logging.getLogger(__name__)

SPECTRAL_SIZE_LIMIT = 400


def diag_H(p, sets, penalties):
    """Diagonal of ``H = Q + (beta + 1/rho) I - beta B`` over all ``n`` indices."""
    beta, rho = penalties.beta, penalties.rho
    return p.Q.diagonal() + 1.0 / rho + beta * ~sets.b_mask


def build_E(sets, dH):
    """Diagonal of the dropping matrix over the ``B-hat`` indices.

    Parameters
    ----------
    sets : ActiveSets
    dH : ndarray
        Full-length diagonal of ``H``.

    Returns
    -------
    ndarray
        ``1 / dH_i`` where index ``i`` of ``B-hat`` is box-interior, else 0.
    """
    idx = sets.bhat_indices
    return np.where(sets.b_mask[idx], 1.0 / dH[idx], 0.0)


def schur_approx(p, sets, beta, e):
    A_B = p.A[:, sets.bhat_indices]
    S = (A_B @ sp.diags(e) @ A_B.T).tocsr()
    return (S + sp.identity(p.m, format="csr") / beta).tocsr()


@dataclasses.dataclass(frozen=True, eq=False)
class Preconditioner:
    """``P^{-1} = blkdiag(Diag(H_BB)^{-1}, S^{-1})``."""

    diag_H_inv: np.ndarray
    schur_factor: object
    fingerprint: tuple

    @property
    def nb(self):
        return self.diag_H_inv.shape[0]

    def apply(self, v):
        nb = self.nb
        out = np.empty_like(v)
        out[:nb] = self.diag_H_inv * v[:nb]
        if self.schur_factor is not None:
            out[nb:] = self.schur_factor.solve(v[nb:])
        else:
            out[nb:] = v[nb:]
        return out


class PreconditionerCache:
    """Last preconditioner of one solve plus the fill-reducing order for ``S``.

    The ordering is computed once from the pattern of ``A A^T + I``, which
    contains the pattern of every Schur approximation of the same problem.
    """

    def __init__(self):
        self.last = None
        self.factorizations = 0
        self._order = None
        self._order_key = None

    def ordering(self, p):
        if self._order_key is not p:
            pattern = abs(p.A) @ abs(p.A).T + sp.identity(p.m, format="csr")
            self._order = fill_reducing_order(pattern)
            self._order_key = p
        return self._order


def fingerprint(sets, beta):
    return (sets.b_mask.tobytes(), sets.bhat_mask.tobytes(), float(beta))


def build_preconditioner(p, sets, s, cache=None):
    """Return the preconditioner for the current masks and ``beta``.

    A cached preconditioner is returned unchanged when masks and ``beta`` are
    bit-identical to the last build; otherwise ``S`` is refactorized and
    ``cache.factorizations`` is incremented.
    """
    beta = s.penalties.beta
    fp = fingerprint(sets, beta)
    if cache is not None and cache.last is not None and cache.last.fingerprint == fp:
        return cache.last
    dH = diag_H(p, sets, s.penalties)
    e = build_E(sets, dH)
    factor = None
    if p.m > 0:
        S = schur_approx(p, sets, beta, e)
        order = cache.ordering(p) if cache is not None else None
        factor = factorize_spd(S, perm=order)
    pre = Preconditioner(1.0 / dH[sets.bhat_indices], factor, fp)
    if cache is not None:
        cache.last = pre
        if factor is not None:
            cache.factorizations += 1
    return pre


# ------------------------------------------------------------ diagnostics


@dataclasses.dataclass
class SpectralReport:
    """Dense eigenvalue check of the Schur approximation and the preconditioned system."""

    size: int
    schur_eigs: np.ndarray
    schur_upper: float
    schur_ok: bool
    alpha_H: float
    beta_H: float
    alpha_NE: float
    beta_NE: float
    interval_minus: tuple
    interval_plus: tuple
    system_eigs: np.ndarray
    system_ok: bool

    def lines(self):
        se = self.schur_eigs
        me = self.system_eigs
        return [
            f"size = {self.size}",
            f"schur_eigs = {_range(se)}",
            f"schur_bound = [1, {self.schur_upper:.6g}]",
            f"schur_ok = {self.schur_ok}",
            f"alpha_H = {self.alpha_H:.6g}",
            f"beta_H = {self.beta_H:.6g}",
            f"alpha_NE = {self.alpha_NE:.6g}",
            f"beta_NE = {self.beta_NE:.6g}",
            "interval_minus = [{:.6g}, {:.6g}]".format(*self.interval_minus),
            "interval_plus = [{:.6g}, {:.6g}]".format(*self.interval_plus),
            f"system_eigs = {_range(me)}",
            f"system_ok = {self.system_ok}",
        ]


def _range(a):
    return f"[{a.min():.6g}, {a.max():.6g}]" if a.size else "[]"


def _sym_eigs(M):
    return scipy.linalg.eigvalsh(0.5 * (M + M.T)) if M.size else np.zeros(0)


def spectral_diagnostic(p, sets, s, schur_slack=1e-10, interval_slack=1e-8):
    """Dense spectra of ``S^{-1} S_hat`` and ``P^{-1} M`` against their bounds.

    ``S_hat = A_B Diag(H_BB)^{-1} A_B^T + I/beta`` is the Schur complement of
    the diagonally approximated system. Its eigenvalues relative to ``S``
    are computed as ``1 + sigma^2(C^{-1} A_N Diag(H_NN)^{-1/2})``, with
    ``S = C C^T`` and ``N`` the dropped indices, which avoids cancellation.

    Raises
    ------
    TooLarge
        If ``|B-hat| + m`` exceeds 400.
    """
    beta, rho = s.penalties.beta, s.penalties.rho
    idx = sets.bhat_indices
    nb, m = idx.shape[0], p.m
    if nb + m > SPECTRAL_SIZE_LIMIT:
        raise TooLarge(f"system size {nb + m} exceeds {SPECTRAL_SIZE_LIMIT}")
    dH = diag_H(p, sets, s.penalties)
    e = build_E(sets, dH)
    A_B = p.A[:, idx].toarray()
    H = p.Q.toarray() + np.diag(1.0 / rho + beta * ~sets.b_mask)
    H_BB = H[np.ix_(idx, idx)]
    hB = dH[idx]

    S = A_B @ (e[:, None] * A_B.T) + np.eye(m) / beta
    dropped = e == 0.0
    if m:
        sc = 1.0 / np.sqrt(np.diag(S))
        C = np.linalg.cholesky(sc[:, None] * S * sc[None, :])
        W = A_B[:, dropped] / np.sqrt(hB[dropped])[None, :]
        Y = scipy.linalg.solve_triangular(C, sc[:, None] * W, lower=True)
        sv = np.linalg.svd(Y, compute_uv=False) if Y.size else np.zeros(0)
        schur_eigs = np.ones(m)
        schur_eigs[: sv.shape[0]] += sv**2
        schur_eigs.sort()
        sigma_A = np.linalg.norm(p.A.toarray(), 2)
    else:
        schur_eigs = np.zeros(0)
        sigma_A = 0.0
    tau = beta / rho
    schur_upper = 1.0 + sigma_A**2 / (1.0 + tau / beta**2)
    schur_ok = bool(
        np.all(schur_eigs >= 1.0 - schur_slack) and np.all(schur_eigs <= schur_upper + schur_slack)
    )

    if nb:
        hs = 1.0 / np.sqrt(hB)
        h_eigs = _sym_eigs(hs[:, None] * H_BB * hs[None, :])
        alpha_H, beta_H = float(h_eigs[0]), float(h_eigs[-1])
    else:
        alpha_H = beta_H = 1.0
    alpha_NE = float(schur_eigs[0]) if m else 1.0
    beta_NE = float(schur_eigs[-1]) if m else 1.0
    I_minus = (-beta_H - np.sqrt(beta_NE), -alpha_H)
    I_plus = (1.0 / (1.0 + beta_H), 1.0 + np.sqrt(max(beta_NE - 1.0, 0.0)))

    Mhat = np.block([[-H_BB, A_B.T], [A_B, np.eye(m) / beta]])
    Mtil = scipy.linalg.block_diag(np.diag(hB), S)
    if Mhat.size:
        sc = 1.0 / np.sqrt(np.diag(Mtil))
        sys_eigs = scipy.linalg.eigh(
            sc[:, None] * Mhat * sc[None, :], sc[:, None] * Mtil * sc[None, :], eigvals_only=True
        )
    else:
        sys_eigs = np.zeros(0)
    inside = ((sys_eigs >= I_minus[0] - interval_slack) & (sys_eigs <= I_minus[1] + interval_slack)) | (
        (sys_eigs >= I_plus[0] - interval_slack) & (sys_eigs <= I_plus[1] + interval_slack)
    )
    return SpectralReport(
        size=nb + m,
        schur_eigs=schur_eigs,
        schur_upper=float(schur_upper),
        schur_ok=schur_ok,
        alpha_H=alpha_H,
        beta_H=beta_H,
        alpha_NE=alpha_NE,
        beta_NE=beta_NE,
        interval_minus=tuple(float(v) for v in I_minus),
        interval_plus=tuple(float(v) for v in I_plus),
        system_eigs=sys_eigs,
        system_ok=bool(np.all(inside)),
    )
