import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alma.errors import RankDeficientError
from alma.linalg import (
    canonical_signs,
    polar_project,
    rank_project,
    svd_top_left,
    sym_eig_topk,
)


def random_symmetric(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    return (a + a.T) / 2.0


def test_topk_magnitude_ordering():
    pairs = sym_eig_topk(np.diag([3.0, 1.0, -2.0]), 2, by_magnitude=True)
    assert pairs.values.tolist() == [3.0, -2.0]


def test_topk_value_ordering():
    pairs = sym_eig_topk(np.diag([3.0, 1.0, -2.0]), 2, by_magnitude=False)
    assert pairs.values.tolist() == [3.0, 1.0]


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.integers(0, 100))
def test_topk_eigenpair_invariants(n, seed):
    a = random_symmetric(n, seed)
    k = max(1, n // 2)
    pairs = sym_eig_topk(a, k, by_magnitude=True)
    assert np.allclose(pairs.vectors.T @ pairs.vectors, np.eye(k), atol=1e-10)
    resid = a @ pairs.vectors - pairs.vectors * pairs.values
    assert np.linalg.norm(resid) <= 1e-8 * max(np.linalg.norm(a), 1e-12)


def test_topk_rejects_asymmetric():
    with pytest.raises(ValueError):
        sym_eig_topk(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)


def test_canonical_signs_largest_entry_positive():
    v = np.array([[0.1, -0.9], [-0.9, 0.1]])
    out = canonical_signs(v.copy())
    for j in range(out.shape[1]):
        assert out[np.argmax(np.abs(out[:, j])), j] > 0


def test_rank_project_keeps_largest_magnitude():
    out = rank_project(np.diag([1.0, -5.0]), 1)
    assert np.allclose(out, np.diag([0.0, -5.0]))
    out = rank_project(np.diag([3.0, 1.0]), 1)
    assert np.allclose(out, np.diag([3.0, 0.0]))


def test_rank_project_full_rank_is_identity_map():
    a = random_symmetric(4, 8)
    assert np.allclose(rank_project(a, 4), a, atol=1e-12)
    with pytest.warns(RuntimeWarning):
        out = rank_project(a, 9)
    assert np.allclose(out, a, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.integers(0, 100))
def test_rank_project_idempotent(n, seed):
    a = random_symmetric(n, seed)
    k = max(1, n - 2)
    once = rank_project(a, k)
    assert np.allclose(rank_project(once, k), once, atol=1e-9)


def brute_force_best_subset(a, k):
    from itertools import combinations

    w, v = np.linalg.eigh(a)
    best, best_err = None, np.inf
    for keep in combinations(range(len(w)), k):
        keep = list(keep)
        approx = (v[:, keep] * w[keep]) @ v[:, keep].T
        err = np.linalg.norm(a - approx)
        if err < best_err:
            best, best_err = approx, err
    return best


def test_rank_project_is_frobenius_optimal():
    for seed in range(20):
        a = random_symmetric(5, seed)
        for k in (1, 2, 3):
            assert np.allclose(rank_project(a, k), brute_force_best_subset(a, k), atol=1e-9)


def test_polar_rotation_hand_value():
    out = polar_project(np.array([[0.0, -2.0], [2.0, 0.0]]))
    assert np.allclose(out, np.array([[0.0, -1.0], [1.0, 0.0]]), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 100))
def test_polar_orthonormal_and_recovers_frame(m, seed):
    rng = np.random.default_rng(seed)
    L = m + 3
    w0 = np.linalg.qr(rng.normal(size=(L, m)))[0]
    g = rng.normal(size=(m, m))
    g = g @ g.T + m * np.eye(m)  # positive definite
    out = polar_project(w0 @ g)
    assert np.allclose(out.T @ out, np.eye(m), atol=1e-10)
    assert np.allclose(out, w0, atol=1e-8)


def test_polar_rejects_wide_input():
    with pytest.raises(ValueError):
        polar_project(np.ones((2, 3)))


def test_polar_rank_deficient_raises():
    x = np.outer(np.ones(4), [1.0, 0.0])  # second singular value 0
    with pytest.raises(RankDeficientError) as info:
        polar_project(x)
    assert info.value.sigma_min == pytest.approx(0.0, abs=1e-12)
    assert info.value.sigma_max > 0


def test_svd_top_left_frozen():
    out = svd_top_left(np.diag([5.0, 1.0]), 1)
    assert np.allclose(out, np.array([[1.0], [0.0]]), atol=1e-12)


def test_svd_top_left_spans_dominant_subspace():
    rng = np.random.default_rng(9)
    x = rng.normal(size=(6, 4))
    u = svd_top_left(x, 2)
    assert np.allclose(u.T @ u, np.eye(2), atol=1e-10)
    u_ref = np.linalg.svd(x, full_matrices=False)[0][:, :2]
    # same subspace regardless of sign conventions
    assert np.linalg.norm(u @ u.T - u_ref @ u_ref.T) < 1e-9
