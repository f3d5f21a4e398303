"""Power means and their gradients, stable for strongly negative powers.

Both functions factor out ``m = min(y)`` so that every ratio ``y_j / m`` is at
least one; for ``s < 0`` the powers ``(y_j / m) ** s`` then lie in ``(0, 1]``
and nothing overflows even at ``s = -100``. They operate on the last axis, so
an ``n x k`` matrix yields ``n`` means (or an ``n x k`` gradient) at once.
"""

from __future__ import annotations

import numpy as np

from .core import ContractError


class PowerMeanDomainError(ContractError):
    pass


def _check(y, s: float) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 0 or y.shape[-1] < 1:
        raise PowerMeanDomainError("power mean needs at least one argument")
    if s == 0:
        raise PowerMeanDomainError("s = 0 (geometric mean) is not supported")
    if s > 1:
        raise PowerMeanDomainError(f"s must be <= 1, got {s}")
    if not np.all(y > 0) or not np.all(np.isfinite(y)):
        raise PowerMeanDomainError("power mean arguments must be positive and finite")
    return y


def _scaled_terms(y: np.ndarray, s: float):
    m = y.min(axis=-1, keepdims=True)
    t = y / m
    mean_ts = np.mean(t**s, axis=-1, keepdims=True)
    return m, t, mean_ts


def mean_and_gradient(y: np.ndarray, s: float) -> tuple[np.ndarray, np.ndarray]:
    """Power means and gradients together, sharing the rescaled powers.

    No argument checking; ``y`` must already be positive and finite.
    """
    m = y.min(axis=-1, keepdims=True)
    t = y / m
    ts = t**s
    mean_ts = np.mean(ts, axis=-1, keepdims=True)
    M = (m * mean_ts ** (1.0 / s))[..., 0]
    # t**(s-1) == ts / t
    G = mean_ts ** (1.0 / s - 1.0) * (ts / t) / y.shape[-1]
    return M, G


def power_mean(y, s: float):
    """``((1/k) sum_j y_j**s) ** (1/s)`` along the last axis."""
    y = _check(y, s)
    m, _, mean_ts = _scaled_terms(y, s)
    out = (m * mean_ts ** (1.0 / s))[..., 0]
    return float(out) if out.ndim == 0 else out


def power_mean_gradient(y, s: float) -> np.ndarray:
    """Partial derivatives of :func:`power_mean` with respect to each ``y_j``.

    The gradient is homogeneous of degree zero, so after rescaling by the
    minimum it reads ``(1/k) * mean(t**s) ** (1/s - 1) * t_j ** (s - 1)`` with
    ``t = y / min(y)``.
    """
    y = _check(y, s)
    _, t, mean_ts = _scaled_terms(y, s)
    k = y.shape[-1]
    return mean_ts ** (1.0 / s - 1.0) * t ** (s - 1.0) / k
