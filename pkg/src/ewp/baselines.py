"""Lloyd's k-means and power k-means."""

from __future__ import annotations

import numpy as np

from .core import (
    ContractError,
    FitResult,
    SolverConfig,
    as_centroids,
    as_data_matrix,
    pairwise_sq_dists,
    spawn_rng,
    uniform_weights,
)
from .solver import _annealed_mm, init_centroids, reseed_empty


def power_kmeans_fit(
    X, k: int, config: SolverConfig | None = None, *, init=None, record_centroids: bool = False
) -> FitResult:
    """Power k-means: the annealed loop with feature weights frozen at ``1/p``.

    The trace holds the unweighted power-mean objective (no entropy term).
    """
    config = config or SolverConfig()
    return _annealed_mm(X, k, config, init, False, record_centroids)


def lloyd_fit(
    X, k: int, config: SolverConfig | None = None, *, init=None, record_centroids: bool = False
) -> FitResult:
    """Classic Lloyd iterations; stops when labels repeat or after ``max_iter`` sweeps."""
    config = config or SolverConfig()
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

    D = pairwise_sq_dists(X, Theta)
    labels = np.argmin(D, axis=1)
    trace = [float(D.min(axis=1).sum())]
    centroid_trace = [Theta.copy()] if record_centroids else None
    converged = False
    it = 0
    while it < config.max_iter:
        it += 1
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros((k, p))
        np.add.at(sums, labels, X)
        empty = counts == 0
        Theta = np.where(empty[:, None], Theta, sums / np.maximum(counts, 1)[:, None])
        if empty.any():
            Theta = reseed_empty(X, Theta, empty, w)
        D = pairwise_sq_dists(X, Theta)
        new_labels = np.argmin(D, axis=1)
        trace.append(float(D.min(axis=1).sum()))
        if record_centroids:
            centroid_trace.append(Theta.copy())
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

    return FitResult(
        centroids=Theta,
        weights=w,
        labels=labels.astype(np.int64),
        objective_trace=trace,
        s_trace=[],
        iterations=it,
        converged=converged,
        centroid_trace=centroid_trace,
    )
