"""Partition agreement (NMI) and the plain k-means objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, as_centroids, as_data_matrix, as_partition, pairwise_sq_dists


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    row_totals: np.ndarray
    col_totals: np.ndarray
    n: int

    @classmethod
    def from_labels(cls, a, b) -> ContingencyTable:
        a = as_partition(a)
        b = as_partition(b)
        if a.shape != b.shape:
            raise ContractError(f"partitions differ in length: {a.size} vs {b.size}")
        if a.size == 0:
            raise ContractError("partitions must be non-empty")
        _, ai = np.unique(a, return_inverse=True)
        _, bi = np.unique(b, return_inverse=True)
        counts = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
        np.add.at(counts, (ai, bi), 1)
        return cls(counts, counts.sum(axis=1), counts.sum(axis=0), int(a.size))


def _entropy(totals: np.ndarray, n: int) -> float:
    p = totals[totals > 0] / n
    return float(-np.sum(p * np.log(p)))


def mutual_information(table: ContingencyTable) -> float:
    nz = table.counts > 0
    nij = table.counts[nz].astype(np.float64)
    outer = np.outer(table.row_totals, table.col_totals)[nz].astype(np.float64)
    mi = float(np.sum(nij / table.n * np.log(table.n * nij / outer)))
    return max(mi, 0.0)


def nmi(a, b) -> float:
    """Normalized mutual information ``I(a; b) / sqrt(H(a) H(b))`` (natural log).

    Two single-cluster partitions score 1; if exactly one is single-cluster
    the score is 0.
    """
    table = ContingencyTable.from_labels(a, b)
    ha = _entropy(table.row_totals, table.n)
    hb = _entropy(table.col_totals, table.n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    return min(mutual_information(table) / np.sqrt(ha * hb), 1.0)


def kmeans_objective(X, Theta) -> float:
    """Sum over points of the squared Euclidean distance to the nearest centroid."""
    X = as_data_matrix(X)
    Theta = as_centroids(Theta, X.shape[1])
    return float(pairwise_sq_dists(X, Theta).min(axis=1).sum())
