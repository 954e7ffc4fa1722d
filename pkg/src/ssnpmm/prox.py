"""Closed-form proximal maps for the weighted l1 norm and box indicator.

Here ``g(x) = sum_i d_i |x_i|`` with ``d >= 0`` and ``K = {x : l <= x <= u}``.
All functions are vectorized and allocate their outputs.
"""
import dataclasses

import numpy as np

from .exceptions import ValidationError


@dataclasses.dataclass(frozen=True)
class BoxSet:
    """Componentwise box ``[l, u]`` with extended-real bounds."""

    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        l = np.asarray(self.l, dtype=np.float64)
        u = np.asarray(self.u, dtype=np.float64)
        if l.shape != u.shape:
            raise ValidationError(f"bound shapes differ: {l.shape} vs {u.shape}")
        if np.any(np.isnan(l)) or np.any(np.isnan(u)):
            raise ValidationError("bounds contain NaN")
        if np.any(l > u):
            raise ValidationError("lower bound exceeds upper bound")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "u", u)

    def interior_mask(self, w):
        """``True`` where ``l_i < w_i < u_i`` (strict)."""
        return (w > self.l) & (w < self.u)


def soft_threshold(w, zeta, d):
    """Prox of ``zeta * g``: ``max(|w_i| - zeta d_i, 0) sign(w_i)``."""
    w = np.asarray(w, dtype=np.float64)
    return np.maximum(np.abs(w) - zeta * np.asarray(d, dtype=np.float64), 0.0) * np.sign(w)


def clamp_dual_l1(v, d):
    """Projection onto ``[-d, d]``, the prox of the conjugate of ``g``."""
    d = np.asarray(d, dtype=np.float64)
    return np.clip(v, -d, d)


def project_box(w, K):
    """Euclidean projection onto the box ``K``."""
    return np.clip(np.asarray(w, dtype=np.float64), K.l, K.u)


def prox_conjugate_box(v, beta, K):
    """Prox of ``beta * delta_K^*``, equal to ``v - beta Pi_K(v / beta)``.

    Evaluated as ``max(v - beta u, 0) + min(v - beta l, 0)``, which avoids
    subtracting two numbers of size ``beta |x|``.
    """
    v = np.asarray(v, dtype=np.float64)
    return np.maximum(v - beta * K.u, 0.0) + np.minimum(v - beta * K.l, 0.0)


def box_excess(z, beta, x, K):
    """``z + beta x - beta Pi_K(z / beta + x)`` without cancellation.

    Returns the value together with the two shifted quantities
    ``t_u = z + beta (x - u)`` and ``t_l = z + beta (x - l)``; the point
    ``z / beta + x`` is strictly inside the box exactly when ``t_u < 0 < t_l``.
    """
    t_u = z + beta * (x - K.u)
    t_l = z + beta * (x - K.l)
    return np.maximum(t_u, 0.0) + np.minimum(t_l, 0.0), t_u, t_l


def project_subdiff_g(v, x, d):
    """Project ``v`` onto the subdifferential of ``g`` at ``x``.

    The set is ``[-d_i, d_i]`` where ``x_i == 0`` (bitwise zero) and the point
    ``{d_i sign(x_i)}`` elsewhere.
    """
    v = np.asarray(v, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    return np.where(x == 0.0, np.clip(v, -d, d), d * np.sign(x))
