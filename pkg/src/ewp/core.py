"""Shared data model: input validation, solver configuration, fit results and
the weighted squared distance used throughout the package.

Matrices are plain ``float64`` numpy arrays in row-major observation layout
(``n x p`` data, ``k x p`` centroids). Labels are 0-based integer arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

SIMPLEX_TOL = 1e-12


class ContractError(ValueError):
    """An argument violates a documented precondition (shape, domain, simplex)."""


class EmptyClusterSignal(ArithmeticError):
    """Raised when a centroid receives (numerically) zero total weight."""

    def __init__(self, clusters):
        self.clusters = tuple(int(j) for j in clusters)
        super().__init__(f"empty clusters: {self.clusters}")


def as_data_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ContractError(f"data must be 2-D, got shape {X.shape}")
    n, p = X.shape
    if n < 1 or p < 1:
        raise ContractError(f"data must have n >= 1 and p >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractError("data contains NaN or Inf")
    return X


def as_centroids(Theta, p: int | None = None) -> np.ndarray:
    Theta = np.asarray(Theta, dtype=np.float64)
    if Theta.ndim != 2 or Theta.shape[0] < 1:
        raise ContractError(f"centroids must be a non-empty k x p array, got {Theta.shape}")
    if p is not None and Theta.shape[1] != p:
        raise ContractError(f"centroids have {Theta.shape[1]} columns, data has {p}")
    if not np.all(np.isfinite(Theta)):
        raise ContractError("centroids contain NaN or Inf")
    return Theta


def as_feature_weights(w, p: int | None = None) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1:
        raise ContractError(f"feature weights must be a vector, got shape {w.shape}")
    if p is not None and w.shape[0] != p:
        raise ContractError(f"feature weights have length {w.shape[0]}, expected {p}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ContractError("feature weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ContractError(f"feature weights sum to {w.sum()!r}, not 1")
    return w


def as_partition(labels, n: int | None = None, k: int | None = None) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ContractError("labels must be a vector")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        as_int = labels.astype(np.int64)
        if not np.array_equal(as_int, labels):
            raise ContractError("labels must be integers")
        labels = as_int
    labels = labels.astype(np.int64, copy=False)
    if n is not None and labels.shape[0] != n:
        raise ContractError(f"expected {n} labels, got {labels.shape[0]}")
    if labels.size and labels.min() < 0:
        raise ContractError("labels must be nonnegative")
    if k is not None and labels.size and labels.max() >= k:
        raise ContractError(f"label {labels.max()} out of range for k={k}")
    return labels


def uniform_weights(p: int) -> np.ndarray:
    return np.full(p, 1.0 / p)


@dataclass(frozen=True)
class SolverConfig:
    """Every knob of the annealed solver.

    ``lam`` is the entropy regularization strength, ``s0`` the initial power,
    ``eta`` the multiplicative annealing rate and ``s_floor`` the power below
    which annealing stops. Iteration stops once the sup-norm change of both
    centroids and weights drops below ``conv_tol`` or after ``max_iter`` sweeps.
    """

    lam: float = 1.0
    s0: float = -1.0
    eta: float = 1.05
    s_floor: float = -100.0
    max_iter: int = 500
    conv_tol: float = 1e-6
    dist_floor: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        if not self.lam > 0:
            raise ContractError(f"lam must be > 0, got {self.lam}")
        if not self.s0 < 0:
            raise ContractError(f"s0 must be < 0, got {self.s0}")
        if not self.eta > 1:
            raise ContractError(f"eta must be > 1, got {self.eta}")
        if not self.s_floor <= self.s0:
            raise ContractError(f"s_floor ({self.s_floor}) must be <= s0 ({self.s0})")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ContractError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not self.conv_tol > 0:
            raise ContractError(f"conv_tol must be > 0, got {self.conv_tol}")
        if not self.dist_floor > 0:
            raise ContractError(f"dist_floor must be > 0, got {self.dist_floor}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ContractError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def with_(self, **changes) -> SolverConfig:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "s0": self.s0,
            "eta": self.eta,
            "s_floor": self.s_floor,
            "max_iter": int(self.max_iter),
            "conv_tol": self.conv_tol,
            "dist_floor": self.dist_floor,
            "seed": int(self.seed),
        }


@dataclass
class FitResult:
    centroids: np.ndarray
    weights: np.ndarray
    labels: np.ndarray
    objective_trace: list[float] = field(default_factory=list)
    s_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    centroid_trace: list[np.ndarray] | None = None

    @property
    def final_objective(self) -> float:
        return self.objective_trace[-1]

    @property
    def final_s(self) -> float | None:
        return self.s_trace[-1] if self.s_trace else None


def weighted_sq_dist(x, theta, w) -> float:
    """Return ``sum_l w_l (x_l - theta_l)^2``."""
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if not (x.ndim == theta.ndim == w.ndim == 1) or not (x.shape == theta.shape == w.shape):
        raise ContractError(
            f"dimension mismatch: x{x.shape}, theta{theta.shape}, w{w.shape}"
        )
    d = x - theta
    return float(np.dot(w, d * d))


def pairwise_weighted_sq_dists(X: np.ndarray, Theta: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``n x k`` matrix of weighted squared distances between rows of X and Theta.

    Uses the expanded form on column-centered inputs so the work is three
    matrix products; negative round-off is clipped to zero.
    """
    mu = X.mean(axis=0)
    Xc = X - mu
    Tc = Theta - mu
    xx = (Xc * Xc) @ w
    tt = (Tc * Tc) @ w
    D = xx[:, None] + tt[None, :] - 2.0 * (Xc @ (Tc * w).T)
    np.maximum(D, 0.0, out=D)
    return D


def pairwise_sq_dists(X: np.ndarray, Theta: np.ndarray) -> np.ndarray:
    """Plain squared Euclidean distances, ``n x k``."""
    return pairwise_weighted_sq_dists(X, Theta, np.ones(X.shape[1]))


def spawn_rng(seed, *key: int) -> np.random.Generator:
    """PCG64 generator for substream ``key`` of ``seed``.

    Substreams are derived with ``SeedSequence(seed, spawn_key=key)``, so the
    stream for a given key never depends on how many other streams were drawn.
    """
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + key)
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit integer seed for substream ``key`` (used to hand seeds to generators)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
