import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ewp.baselines import lloyd_fit, power_kmeans_fit
from ewp.core import ContractError, EmptyClusterSignal, SolverConfig, weighted_sq_dist
from ewp.metrics import nmi
from ewp.power_mean import power_mean, power_mean_gradient
from ewp.solver import (
    assign,
    ewp_fit,
    feature_dispersion,
    init_centroids,
    majorizer_weights,
    min_objective,
    objective,
    update_centroids,
    update_weights,
)


def random_instance(seed, n=40, p=3, k=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p)) * rng.uniform(0.5, 3.0, size=p)
    Theta = X[rng.choice(n, k, replace=False)] + rng.normal(scale=0.1, size=(k, p))
    w = rng.dirichlet(np.ones(p))
    return X, Theta, w


def brute_objective(X, Theta, w, s, lam, floor=1e-12):
    total = 0.0
    k = len(Theta)
    for x in X:
        ys = [max(weighted_sq_dist(x, t, w), floor) for t in Theta]
        total += (sum(y**s for y in ys) / k) ** (1.0 / s)
    return total + lam * sum(v * math.log(v) for v in w if v > 0)


# --- majorizer weights -------------------------------------------------------


def test_phi_equidistant_point_is_uniform():
    X = np.array([[0.0, 0.0]])
    Theta = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    np.testing.assert_allclose(majorizer_weights(X, Theta, [0.5, 0.5], -3.0), 0.25, rtol=1e-14)


def test_phi_single_point_harmonic():
    phi = majorizer_weights([[0.0]], [[1.0], [3.0]], [1.0], -1.0)
    # gradient of M_{-1} at (1, 9), mpmath: (1.62, 0.02)
    np.testing.assert_allclose(phi[0], [1.62, 0.02], rtol=1e-13)
    h = 1e-6
    fd = [(power_mean([1 + h, 9], -1) - power_mean([1 - h, 9], -1)) / (2 * h),
          (power_mean([1, 9 + h], -1) - power_mean([1, 9 - h], -1)) / (2 * h)]
    np.testing.assert_allclose(phi[0], fd, rtol=1e-5)


def test_phi_concentrates_on_nearest_centroid():
    X, Theta, w = random_instance(1, n=60, k=4)
    D = np.array([[weighted_sq_dist(x, t, w) for t in Theta] for x in X])
    ordered = np.sort(D, axis=1)
    distinct = ordered[:, 1] >= 1.2 * ordered[:, 0]
    assert distinct.sum() > 30
    phi = majorizer_weights(X[distinct], Theta, w, -80.0)
    nearest = np.argmin(D[distinct], axis=1)
    assert np.array_equal(np.argmax(phi, axis=1), nearest)
    off = phi.copy()
    off[np.arange(len(phi)), nearest] = 0.0
    assert off.max() < 1e-4


@pytest.mark.parametrize("s", [-1.0, -4.2, -100.0])
def test_phi_rows_are_power_mean_gradients(s):
    X, Theta, w = random_instance(2, n=30, k=5)
    phi = majorizer_weights(X, Theta, w, s)
    assert np.all(np.isfinite(phi)) and np.all(phi.max(axis=1) > 0)
    # far centroids underflow to exactly 0 at s = -100; milder powers stay positive
    assert np.all(phi >= 0) and (s < -50 or np.all(phi > 0))
    for i, x in enumerate(X):
        y = [max(weighted_sq_dist(x, t, w), 1e-12) for t in Theta]
        np.testing.assert_allclose(phi[i], power_mean_gradient(y, s), rtol=1e-8)


def test_phi_handles_zero_distance():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    phi = majorizer_weights(X, X.copy(), [0.5, 0.5], -1.0)
    assert np.all(np.isfinite(phi)) and np.all(phi > 0)


# --- centroid update --------------------------------------------------------------


def test_uniform_phi_gives_column_means():
    X = np.random.default_rng(0).normal(size=(25, 4))
    Theta = update_centroids(X, np.full((25, 3), 1 / 3))
    np.testing.assert_allclose(Theta, np.tile(X.mean(axis=0), (3, 1)), rtol=0, atol=1e-12)


def test_weighted_average_by_hand():
    Theta = update_centroids([[0.0, 0.0], [4.0, 8.0]], [[1.0], [3.0]])
    np.testing.assert_allclose(Theta, [[3.0, 6.0]], rtol=1e-15)


def test_one_hot_phi_is_lloyd_step():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(30, 2))
    labels = np.arange(30) % 3
    Theta = update_centroids(X, np.eye(3)[labels])
    for j in range(3):
        np.testing.assert_allclose(Theta[j], X[labels == j].mean(axis=0), rtol=1e-13)


def test_empty_cluster_signal():
    phi = np.array([[1.0, 0.0], [1.0, 1e-320]])
    with pytest.raises(EmptyClusterSignal) as info:
        update_centroids([[0.0], [1.0]], phi)
    assert info.value.clusters == (1,)


# --- weight update ------------------------------------------------------------------


def test_equal_dispersion_gives_uniform_weights():
    X = np.array([[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]])
    w = update_weights(X, [[0.0, 0.0, 0.0]], [[1.0], [1.0]], 0.7)
    np.testing.assert_allclose(w, 1 / 3, rtol=1e-15)


def test_softmax_closed_form():
    lam = 2.0
    a = math.sqrt(lam * math.log(3.0))  # dispersion (0, lam ln 3)
    w = update_weights([[0.0, a]], [[0.0, 0.0]], [[1.0]], lam)
    np.testing.assert_allclose(w, [0.75, 0.25], rtol=1e-12)


def test_huge_lambda_gives_uniform_weights():
    X, Theta, _ = random_instance(5, p=6)
    phi = majorizer_weights(X, Theta, np.full(6, 1 / 6), -1.0)
    w = update_weights(X, Theta, phi, 1e12)
    assert np.max(np.abs(w - 1 / 6)) < 1e-6


def test_weight_update_stable_for_large_dispersion():
    X = np.array([[0.0, 1e6, 3e6]])
    w = update_weights(X, [[0.0, 0.0, 0.0]], [[1.0]], 1e-3)
    np.testing.assert_array_equal(w, [1.0, 0.0, 0.0])


def test_feature_dispersion_brute_force():
    X, Theta, w = random_instance(6, n=20, p=4, k=3)
    X = X + 100.0
    Theta = Theta + 100.0
    phi = majorizer_weights(X, Theta, w, -2.0)
    brute = np.zeros(4)
    for i in range(20):
        for j in range(3):
            brute += phi[i, j] * (X[i] - Theta[j]) ** 2
    np.testing.assert_allclose(feature_dispersion(X, Theta, phi), brute, rtol=1e-9)


# --- objective --------------------------------------------------------------------------


def test_objective_single_centroid_uniform_weights():
    X, Theta, _ = random_instance(7, k=1, p=4)
    w = np.full(4, 0.25)
    lam = 3.0
    expected = sum(weighted_sq_dist(x, Theta[0], w) for x in X) - lam * math.log(4)
    assert objective(X, Theta, w, -2.0, lam) == pytest.approx(expected, rel=1e-12)


def test_objective_one_hot_weights_have_no_entropy_term():
    X, Theta, _ = random_instance(8, p=3)
    w = np.array([0.0, 1.0, 0.0])
    lam = 5.0
    assert objective(X, Theta, w, -1.5, lam) == pytest.approx(objective(X, Theta, w, -1.5, 0.0 + 1e-300), rel=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_objective_matches_brute_force(seed):
    X, Theta, w = random_instance(seed, n=4, p=2, k=2)
    for s in (-1.0, -3.0, 0.5):
        assert objective(X, Theta, w, s, 0.8) == pytest.approx(brute_objective(X, Theta, w, s, 0.8), rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_entropy_term_bounds(seed):
    rng = np.random.default_rng(seed)
    p = 5
    w = rng.dirichlet(np.ones(p) * 0.3)
    X, Theta, _ = random_instance(seed, p=p)
    lam = 2.0
    ent = objective(X, Theta, w, -1.0, lam) - objective(X, Theta, w, -1.0, 1e-300)
    assert -lam * math.log(p) - 1e-9 <= ent <= 1e-12


# --- assignment ------------------------------------------------------------------------------


def test_assign_exact_hit():
    Theta = np.array([[0.0, 0.0], [5.0, 5.0], [2.0, -1.0]])
    assert assign([[2.0, -1.0]], Theta, [0.5, 0.5])[0] == 2


def test_assign_tie_goes_to_lowest_index():
    Theta = np.array([[1.0, 0.0], [-1.0, 0.0]])
    assert assign([[0.0, 0.0]], Theta, [0.5, 0.5])[0] == 0


def test_assign_ignores_zero_weight_feature():
    assert assign([[0.0, 100.0]], [[0.0, 0.0], [5.0, 100.0]], [1.0, 0.0])[0] == 0


# --- full solver ---------------------------------------------------------------------------


def test_k_distinct_points_are_recovered():
    X = np.array([[0.0, 0.0], [3.0, 1.0], [-2.0, 4.0], [1.0, -5.0]])
    fit = ewp_fit(X, 4, SolverConfig(lam=1.0, seed=3))
    assert fit.converged
    order = np.lexsort(fit.centroids.T[::-1])
    np.testing.assert_allclose(fit.centroids[order], X[np.lexsort(X.T[::-1])], atol=1e-6)


def two_blobs(n, sigma, seed):
    rng = np.random.default_rng(seed)
    truth = rng.integers(0, 2, size=n)
    centers = np.array([[0.0, 0.0], [1.0, 1.0]])
    return centers[truth] + rng.normal(scale=sigma, size=(n, 2)), truth


def test_well_separated_blobs():
    X, truth = two_blobs(200, 0.01, 0)
    fit = ewp_fit(X, 2, SolverConfig(lam=1.0, seed=1))
    assert nmi(fit.labels, truth) == 1.0
    # oracle: sample means of the generated groups
    means = np.array([X[truth == c].mean(axis=0) for c in range(2)])
    order = np.argsort(fit.centroids[:, 0])
    np.testing.assert_allclose(fit.centroids[order], means, atol=1e-6)
    np.testing.assert_allclose(fit.centroids[order], [[0.0, 0.0], [1.0, 1.0]], atol=0.05)


def test_entropy_dominated_limit_reduces_to_power_kmeans():
    X, _, _ = random_instance(9, n=80, p=4, k=3)
    init = init_centroids(X, 3, np.random.default_rng(0))
    cfg = SolverConfig(lam=1e12)
    a = ewp_fit(X, 3, cfg, init=init, record_centroids=True)
    b = power_kmeans_fit(X, 3, cfg, init=init, record_centroids=True)
    assert np.max(np.abs(a.weights - 0.25)) < 1e-6
    assert len(a.centroid_trace) == len(b.centroid_trace)
    for ta, tb in zip(a.centroid_trace, b.centroid_trace):
        np.testing.assert_allclose(ta, tb, atol=1e-6)
    assert np.array_equal(a.labels, b.labels)


def test_k_larger_than_n_rejected():
    with pytest.raises(ContractError):
        ewp_fit(np.zeros((3, 2)) + np.arange(3)[:, None], 4)


def descent_ok(trace, slack=1e-9):
    t = np.asarray(trace)
    return np.all(t[1:] <= t[:-1] + slack * np.abs(t[:-1]))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0), st.sampled_from([-1.0, -3.0, -20.0]))
def test_fixed_power_mm_descent(seed, lam, s0):
    X, _, _ = random_instance(seed, n=50, p=4, k=4)
    fit = ewp_fit(X, 4, SolverConfig(lam=lam, s0=s0, seed=seed, max_iter=60), fixed_s=True)
    assert descent_ok(fit.objective_trace)
    assert set(fit.s_trace) == {s0}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_annealed_descent_and_hull(seed, lam):
    X, _, _ = random_instance(seed, n=60, p=5, k=5)
    fit = ewp_fit(X, 5, SolverConfig(lam=lam, seed=seed), record_centroids=True)
    assert descent_ok(fit.objective_trace)
    lo, hi = X.min(axis=0), X.max(axis=0)
    for Theta in fit.centroid_trace:
        assert np.all(Theta >= lo) and np.all(Theta <= hi)
    s = np.asarray(fit.s_trace)
    assert np.all(np.diff(s) <= 0) and s.min() >= -100.0 and s[0] == -1.0


def test_annealing_schedule_reaches_floor():
    X, _, _ = random_instance(11, n=50, p=3, k=3)
    fit = ewp_fit(X, 3, SolverConfig(lam=1.0, conv_tol=1e-300, max_iter=150))
    s = np.asarray(fit.s_trace)
    np.testing.assert_allclose(s[:5], [-1.0, -1.05, -1.05**2, -1.05**3, -1.05**4], rtol=1e-14)
    assert s[-1] == -100.0 and s.min() == -100.0


def test_uniform_convergence_gap_shrinks_along_schedule():
    X, Theta, w = random_instance(12, n=50, p=4, k=4)
    lam = 0.5
    f_min = min_objective(X, Theta, w, lam)
    s, gaps = -1.0, []
    while s > -100.0:
        gaps.append(objective(X, Theta, w, s, lam) - f_min)
        s *= 1.05
    gaps.append(objective(X, Theta, w, -100.0, lam) - f_min)
    gaps = np.array(gaps)
    assert np.all(gaps >= 0)
    assert np.all(np.diff(gaps) <= 1e-12 * abs(f_min))


def test_determinism():
    X, _, _ = random_instance(13, n=70, p=4, k=4)
    cfg = SolverConfig(lam=2.0, seed=99)
    a, b = ewp_fit(X, 4, cfg), ewp_fit(X, 4, cfg)
    assert np.array_equal(a.labels, b.labels)
    np.testing.assert_allclose(a.objective_trace, b.objective_trace, rtol=1e-15, atol=0)
    np.testing.assert_array_equal(a.s_trace, b.s_trace)


def test_one_sweep_at_floor_power_is_a_lloyd_step():
    rng = np.random.default_rng(14)
    centers = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 1.0], [0.0, 5.0, -2.0]])
    X = centers[np.arange(40) % 3] + rng.normal(scale=0.4, size=(40, 3))
    init = X[:3] + 0.5
    k = 3
    w = np.full(3, 1 / 3)
    phi = majorizer_weights(X, init, w, -100.0)
    labels = assign(X, init, w)
    normalized = phi / phi.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(normalized, np.eye(k)[labels], atol=1e-4)

    cfg = SolverConfig(s0=-100.0, s_floor=-100.0, max_iter=1)
    power = power_kmeans_fit(X, k, cfg, init=init)
    lloyd = lloyd_fit(X, k, cfg, init=init, record_centroids=True)
    np.testing.assert_allclose(power.centroids, lloyd.centroid_trace[1], atol=1e-4)


def test_empty_cluster_is_reseeded():
    # a far-away centroid gets no mass at s = -100 and must be moved onto the data
    X = np.array([[0.0], [0.1], [0.2], [10.0], [10.1]])
    init = np.array([[0.1], [10.0], [1e6]])
    fit = ewp_fit(X, 3, SolverConfig(s0=-100.0, s_floor=-100.0, lam=1.0), init=init)
    assert np.all(fit.centroids >= 0.0) and np.all(fit.centroids <= 10.1)
    assert len(np.unique(fit.labels)) == 3
