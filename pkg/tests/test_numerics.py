"""Tests for the dense linear-algebra kernel."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fincascade import solve_linear, spectral_radius_bound
from fincascade.errors import DimensionMismatch, SingularMatrix


def test_identity_solve():
    y = solve_linear(np.eye(3), np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(y, [1.0, 2.0, 3.0], rtol=0, atol=0)


def test_diagonal_solve():
    A = np.array([[2.0, 0.0], [0.0, 4.0]])
    y = solve_linear(A, np.array([2.0, 8.0]))
    np.testing.assert_allclose(y, [1.0, 2.0], atol=1e-14)


def test_residual_oracle_5x5():
    rng = np.random.default_rng(7)
    A = rng.uniform(-1.0, 1.0, size=(5, 5)) + 5.0 * np.eye(5)
    b = rng.uniform(-10.0, 10.0, size=5)
    y = solve_linear(A, b)
    assert np.abs(A @ y - b).max() < 1e-9


def test_singular_matrix_raises():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrix):
        solve_linear(A, np.array([1.0, 1.0]))


def test_rectangular_rejected():
    with pytest.raises(DimensionMismatch):
        solve_linear(np.ones((2, 3)), np.ones(2))
    with pytest.raises(DimensionMismatch):
        solve_linear(np.eye(3), np.ones(2))


def test_spectral_zero_matrix():
    assert spectral_radius_bound(np.zeros((3, 3))) == (0.0, 0.0)


def test_spectral_symmetric_pair():
    # eigenvalues of [[0, .5], [.5, 0]] are +-0.5 by the characteristic
    # polynomial lambda^2 - 0.25
    row_max, est = spectral_radius_bound(np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert row_max == pytest.approx(0.5, abs=1e-12)
    assert est == pytest.approx(0.5, abs=1e-8)


def test_spectral_identity():
    row_max, est = spectral_radius_bound(np.eye(2))
    assert row_max == pytest.approx(1.0, abs=1e-12)
    assert est == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=12), st.integers(min_value=0, max_value=2**31 - 1))
def test_power_estimate_below_row_sum_bound(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    row_max, est = spectral_radius_bound(A)
    assert est <= row_max + 1e-8


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**31 - 1))
def test_solve_roundtrip_well_conditioned(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, size=(n, n)) + (n + 1.0) * np.eye(n)
    if np.linalg.cond(A) >= 1e6:
        return
    y = rng.uniform(-5.0, 5.0, size=n)
    out = solve_linear(A, A @ y)
    np.testing.assert_allclose(out, y, atol=1e-8, rtol=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**31 - 1))
def test_matmul_associativity(n, seed):
    rng = np.random.default_rng(seed)
    A, B, C = (rng.uniform(-1.0, 1.0, size=(n, n)) for _ in range(3))
    left = (A @ B) @ C
    right = A @ (B @ C)
    assert np.abs(left - right).max() < 1e-10
