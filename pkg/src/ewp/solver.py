"""Entropy weighted power k-means.

One sweep of the annealed majorization-minimization loop:

1. ``Phi`` = gradient of the power mean at each point's (clamped) weighted
   squared distances to the current centroids;
2. centroids become ``Phi``-weighted averages of the data;
3. feature weights become a softmax of ``-D_l / lam`` where ``D_l`` is the
   ``Phi``-weighted within-cluster dispersion of feature ``l`` around the new
   centroids;
4. ``s`` is multiplied by ``eta`` (never going below ``s_floor``).

Steps 2 and 3 jointly minimize the surrogate exactly, because the centroid
minimizer does not depend on the weights.
"""

from __future__ import annotations

import logging

import numpy as np

from .core import (
    ContractError,
    EmptyClusterSignal,
    FitResult,
    SolverConfig,
    as_centroids,
    as_data_matrix,
    as_feature_weights,
    pairwise_sq_dists,
    pairwise_weighted_sq_dists,
    spawn_rng,
    uniform_weights,
)
from .power_mean import mean_and_gradient, power_mean, power_mean_gradient

log = logging.getLogger(__name__)

EMPTY_CLUSTER_MASS = 1e-300


def init_centroids(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick ``k`` distinct data rows uniformly at random without replacement.

    Duplicate rows are collapsed first so two initial centroids never coincide
    when the data has at least ``k`` distinct rows.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    if k < 1 or k > n:
        raise ContractError(f"k must lie in [1, n={n}], got {k}")
    _, first = np.unique(X, axis=0, return_index=True)
    candidates = np.sort(first)
    if candidates.size < k:
        candidates = np.arange(n)
    idx = rng.choice(candidates, size=k, replace=False)
    return X[idx].copy()


def majorizer_weights(X, Theta, w, s: float, dist_floor: float = 1e-12) -> np.ndarray:
    """``n x k`` matrix of surrogate coefficients at ``(Theta, w, s)``."""
    X = as_data_matrix(X)
    Theta = as_centroids(Theta, X.shape[1])
    w = as_feature_weights(w, X.shape[1])
    return _phi(pairwise_weighted_sq_dists(X, Theta, w), s, dist_floor)


def _phi(D: np.ndarray, s: float, dist_floor: float) -> np.ndarray:
    return power_mean_gradient(np.maximum(D, dist_floor), s)


def _weighted_means(X: np.ndarray, Phi: np.ndarray):
    mass = Phi.sum(axis=0)
    empty = mass < EMPTY_CLUSTER_MASS
    safe = np.where(empty, 1.0, mass)
    Theta = (Phi.T @ X) / safe[:, None]
    # a convex combination can overshoot the column range by an ulp in floating point
    np.clip(Theta, X.min(axis=0), X.max(axis=0), out=Theta)
    return Theta, mass, empty


def update_centroids(X, Phi) -> np.ndarray:
    """Centroid ``j`` is the ``Phi[:, j]``-weighted average of the rows of X."""
    X = as_data_matrix(X)
    Phi = np.asarray(Phi, dtype=np.float64)
    if Phi.ndim != 2 or Phi.shape[0] != X.shape[0]:
        raise ContractError(f"Phi must be n x k with n={X.shape[0]}, got {Phi.shape}")
    Theta, _, empty = _weighted_means(X, Phi)
    if empty.any():
        raise EmptyClusterSignal(np.flatnonzero(empty))
    return Theta


def feature_dispersion(X: np.ndarray, Theta: np.ndarray, Phi: np.ndarray) -> np.ndarray:
    """``D_l = sum_i sum_j Phi_ij (x_il - theta_jl)^2`` for every feature ``l``."""
    mu = X.mean(axis=0)
    Xc = X - mu
    Tc = Theta - mu
    row_mass = Phi.sum(axis=1)
    col_mass = Phi.sum(axis=0)
    D = row_mass @ (Xc * Xc) - 2.0 * np.einsum("jl,jl->l", Tc, Phi.T @ Xc) + col_mass @ (Tc * Tc)
    return np.maximum(D, 0.0)


def softmax_weights(D: np.ndarray, lam: float) -> np.ndarray:
    z = np.exp(-(D - D.min()) / lam)
    return z / z.sum()


def update_weights(X, Theta, Phi, lam: float) -> np.ndarray:
    """Closed-form entropy-regularized weight update (a softmax of ``-D / lam``)."""
    if not lam > 0:
        raise ContractError(f"lam must be > 0, got {lam}")
    X = as_data_matrix(X)
    Theta = as_centroids(Theta, X.shape[1])
    Phi = np.asarray(Phi, dtype=np.float64)
    if Phi.shape != (X.shape[0], Theta.shape[0]):
        raise ContractError(f"Phi must be {X.shape[0]} x {Theta.shape[0]}, got {Phi.shape}")
    return softmax_weights(feature_dispersion(X, Theta, Phi), lam)


def neg_entropy(w: np.ndarray) -> float:
    """``sum_l w_l log w_l`` with ``0 log 0 = 0``."""
    pos = w[w > 0]
    return float(np.sum(pos * np.log(pos)))


def objective(X, Theta, w, s: float, lam: float, dist_floor: float = 1e-12) -> float:
    """Entropy weighted power k-means objective at power ``s``.

    Squared distances are clamped below at ``dist_floor``, as in the solver.
    """
    X = as_data_matrix(X)
    Theta = as_centroids(Theta, X.shape[1])
    w = as_feature_weights(w, X.shape[1])
    D = np.maximum(pairwise_weighted_sq_dists(X, Theta, w), dist_floor)
    return float(np.sum(power_mean(D, s))) + lam * neg_entropy(w)


def min_objective(X, Theta, w, lam: float, dist_floor: float = 1e-12) -> float:
    """The ``s -> -infinity`` limit: nearest-centroid weighted distances plus entropy."""
    X = as_data_matrix(X)
    Theta = as_centroids(Theta, X.shape[1])
    w = as_feature_weights(w, X.shape[1])
    D = np.maximum(pairwise_weighted_sq_dists(X, Theta, w), dist_floor)
    return float(D.min(axis=1).sum()) + lam * neg_entropy(w)


def assign(X, Theta, w) -> np.ndarray:
    """Nearest centroid under the weighted distance; ties go to the lowest index."""
    X = as_data_matrix(X)
    Theta = as_centroids(Theta, X.shape[1])
    w = as_feature_weights(w, X.shape[1])
    return np.argmin(pairwise_weighted_sq_dists(X, Theta, w), axis=1).astype(np.int64)


def reseed_empty(X: np.ndarray, Theta: np.ndarray, empty: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Move each empty centroid onto the point farthest from its nearest live centroid."""
    Theta = Theta.copy()
    live = ~empty
    nearest = pairwise_weighted_sq_dists(X, Theta[live], w).min(axis=1)
    for j in np.flatnonzero(empty):
        i = int(np.argmax(nearest))
        Theta[j] = X[i]
        nearest = np.minimum(nearest, pairwise_weighted_sq_dists(X, Theta[j : j + 1], w)[:, 0])
    return Theta


def _annealed_mm(
    X: np.ndarray,
    k: int,
    config: SolverConfig,
    init: np.ndarray | None,
    learn_weights: bool,
    record_centroids: bool,
    fixed_s: bool = False,
) -> FitResult:
    X = as_data_matrix(X)
    n, p = X.shape
    if not 1 <= k <= n:
        raise ContractError(f"k must lie in [1, n={n}], got {k}")
    if init is None:
        Theta = init_centroids(X, k, spawn_rng(config.seed))
    else:
        Theta = as_centroids(init, p).copy()
        if Theta.shape[0] != k:
            raise ContractError(f"init has {Theta.shape[0]} rows, expected k={k}")
    w = uniform_weights(p)
    s = float(config.s0)
    floor = config.dist_floor

    def evaluate(Theta, w, s):
        D = pairwise_weighted_sq_dists(X, Theta, w)
        M, G = mean_and_gradient(np.maximum(D, floor), s)
        if learn_weights:
            value = float(np.sum(M)) + config.lam * neg_entropy(w)
        else:
            # weights are 1/p, so Euclidean distances are p times the weighted ones
            value = p * float(np.sum(M))
        if not np.isfinite(value):
            raise FloatingPointError(f"non-finite objective at s={s}")
        return D, G, value

    D, Phi, value = evaluate(Theta, w, s)
    objective_trace = [value]
    s_trace = [s]
    centroid_trace = [Theta.copy()] if record_centroids else None
    converged = False
    it = 0
    while it < config.max_iter:
        it += 1
        Theta_new, _, empty = _weighted_means(X, Phi)
        if empty.any():
            log.debug("iteration %d: reseeding empty clusters %s", it, np.flatnonzero(empty))
            Theta_new = reseed_empty(X, Theta_new, empty, w)
        if learn_weights:
            w_new = softmax_weights(feature_dispersion(X, Theta_new, Phi), config.lam)
        else:
            w_new = w
        s_new = s if fixed_s else max(config.eta * s, config.s_floor)
        delta = max(np.max(np.abs(Theta_new - Theta)), np.max(np.abs(w_new - w)))
        Theta, w, s = Theta_new, w_new, s_new
        D, Phi, value = evaluate(Theta, w, s)
        objective_trace.append(value)
        s_trace.append(s)
        if record_centroids:
            centroid_trace.append(Theta.copy())
        if delta < config.conv_tol:
            converged = True
            break

    return FitResult(
        centroids=Theta,
        weights=w,
        labels=np.argmin(D, axis=1).astype(np.int64),
        objective_trace=objective_trace,
        s_trace=s_trace,
        iterations=it,
        converged=converged,
        centroid_trace=centroid_trace,
    )


def ewp_fit(
    X,
    k: int,
    config: SolverConfig | None = None,
    *,
    init=None,
    record_centroids: bool = False,
    fixed_s: bool = False,
) -> FitResult:
    """Fit entropy weighted power k-means.

    Parameters
    ----------
    X : array_like, shape (n, p)
    k : int
        Number of clusters, ``1 <= k <= n``.
    config : SolverConfig
        Defaults to ``SolverConfig()``.
    init : array_like, shape (k, p), optional
        Initial centroids. When omitted, ``k`` distinct rows are drawn with a
        generator seeded from ``config.seed``.
    record_centroids : bool
        Keep every centroid iterate in ``FitResult.centroid_trace``.
    fixed_s : bool
        Hold ``s`` at ``config.s0`` (no annealing); useful for checking the
        fixed-power descent property.

    Returns
    -------
    FitResult
        ``objective_trace[m]`` is the objective at ``(Theta_m, w_m, s_m)``.
    """
    config = config or SolverConfig()
    return _annealed_mm(X, k, config, init, True, record_centroids, fixed_s)
