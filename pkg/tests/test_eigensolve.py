"""Tests for Sturm bisection, the shifted solver, and inverse power."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tridiag_hira.eigensolve import (
    MIN_BISECT_TOL,
    eigenvalue_index_near,
    inverse_power,
    shifted_solve,
    sturm_bisect,
)
from tridiag_hira.errors import NumericalError
from tridiag_hira.matrix import (
    DiagonalProfile,
    TridiagMatrix,
    apply,
    power_law_profile,
    residual_inf,
)

from .test_matrix import b_eigenvalue_desc, b_eigenvector, b_matrix


# ------------------------------------------------------------- sturm_bisect


def test_bisect_constant_matrix_smallest():
    # smallest eigenvalue of the constant matrix, n=100
    lam = sturm_bisect(b_matrix(100), 1)
    exact = b_eigenvalue_desc(100, 100)
    assert abs(lam - exact) <= 1e-12


def test_bisect_one_by_one_exact():
    M = TridiagMatrix(DiagonalProfile((5.0,)))
    assert sturm_bisect(M, 1) == 7.0


def test_bisect_rejects_tight_tolerance():
    M = TridiagMatrix(power_law_profile(2, 10, 20))
    with pytest.raises(ValueError):
        sturm_bisect(M, 1, tol=MIN_BISECT_TOL / 8)


def test_bisect_near_paper_eigenvalue():
    M = TridiagMatrix(power_law_profile(2, 100, 250))
    k = eigenvalue_index_near(M, 5.1665)
    lam = sturm_bisect(M, k)
    assert abs(lam - 5.1665) <= 5e-4


def test_bisect_matches_dense_spectrum():
    M = TridiagMatrix(power_law_profile(1.5, 6, 30))
    dense = np.diag(M.diagonal()) + np.diag(np.ones(29), 1) + np.diag(np.ones(29), -1)
    eigs = np.linalg.eigvalsh(dense)
    for k in (1, 2, 15, 29, 30):
        lam = sturm_bisect(M, k)
        assert abs(lam - eigs[k - 1]) <= 1e-11 * abs(eigs[k - 1]) + 1e-13


def test_bisect_eigenvalues_simple_and_sorted():
    M = TridiagMatrix(power_law_profile(1.7, 9, 120))
    lams = [sturm_bisect(M, k) for k in range(1, 121)]
    tol = MIN_BISECT_TOL
    for a, b in zip(lams, lams[1:]):
        assert b - a > 10 * tol * abs(b)


def test_eigenvalue_index_near_edges():
    M = TridiagMatrix(power_law_profile(2, 10, 15))
    assert eigenvalue_index_near(M, -5.0) == 1
    assert eigenvalue_index_near(M, 1e9) == 15
    lam7 = sturm_bisect(M, 7)
    assert eigenvalue_index_near(M, lam7 + 1e-9) == 7


# ------------------------------------------------------------ shifted_solve


def test_shifted_solve_diagonally_dominant_limit():
    M = TridiagMatrix(power_law_profile(1, 1000, 3))
    sigma = 1e6
    w = shifted_solve(M, sigma, [1.0, 0.0, 0.0])
    expected = 1.0 / (sigma - M.diag_entry(1))
    assert abs(w[0] - expected) <= 1e-6 * abs(expected)
    assert abs(w[1]) < 1e-11
    assert abs(w[2]) < 1e-16


def test_shifted_solve_zero_shift_hand_case():
    M = TridiagMatrix(power_law_profile(1, 1, 3))
    rhs = np.array([1.0, 0.0, 0.0])
    w = shifted_solve(M, 0.0, rhs)
    # w solves -M w = rhs
    assert np.allclose(apply(M, w), -rhs, atol=1e-12)


def test_shifted_solve_residual():
    M = TridiagMatrix(power_law_profile(2, 50, 200))
    rng = np.random.default_rng(5)
    rhs = rng.standard_normal(200)
    sigma = 3.7
    w = shifted_solve(M, sigma, rhs)
    resid = sigma * w - apply(M, w) - rhs
    assert np.max(np.abs(resid)) <= 1e-12 * np.linalg.norm(rhs)


def test_shifted_solve_singular():
    M = TridiagMatrix(DiagonalProfile((5.0,)))
    with pytest.raises(NumericalError):
        shifted_solve(M, 7.0, [1.0])


def test_shifted_solve_dimension_mismatch():
    M = TridiagMatrix(power_law_profile(1, 1, 3))
    with pytest.raises(ValueError):
        shifted_solve(M, 1.0, [1.0, 2.0])


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=2, max_value=40),
    st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
    st.integers(min_value=0, max_value=2**31),
)
def test_shifted_solve_random_residuals(n, sigma, seed):
    rng = np.random.default_rng(seed)
    M = TridiagMatrix(power_law_profile(1.0 + rng.uniform(0, 2), 1.0 + rng.uniform(0, 20), n))
    rhs = rng.standard_normal(n)
    try:
        w = shifted_solve(M, sigma, rhs)
    except NumericalError:
        return  # sigma landed on an exact-pivot breakdown; acceptable
    resid = sigma * w - apply(M, w) - rhs
    # pivoted elimination keeps the residual small relative to the output
    scale = max(np.max(np.abs(w)), np.linalg.norm(rhs))
    assert np.max(np.abs(resid)) <= 1e-10 * scale


# ------------------------------------------------------------ inverse_power


def test_inverse_power_constant_matrix_closed_form():
    M = b_matrix(3)
    lam, trace = inverse_power(M, 3.9)
    exact = 2.0 + math.sqrt(2.0)
    assert abs(lam - exact) <= 1e-12
    v = b_eigenvector(3, 1)
    if v[0] < 0:
        v = -v
    assert np.max(np.abs(trace.Y - v)) <= 1e-12
    assert trace.Y[0] > 0
    assert abs(np.linalg.norm(trace.Y) - 1.0) <= 1e-14
    assert trace.iterations == 30


def test_inverse_power_early_stop():
    M = TridiagMatrix(power_law_profile(2, 10, 40))
    lam0 = sturm_bisect(M, 10) + 1e-7
    lam, trace = inverse_power(M, lam0, max_iters=30, stop_tol=1e-12)
    assert trace.converged
    assert trace.iterations < 30
    assert abs(lam - sturm_bisect(M, 10)) <= 1e-10


def test_inverse_power_deterministic():
    M = TridiagMatrix(power_law_profile(2, 20, 60))
    lam0 = sturm_bisect(M, 5) + 1e-8
    lam1, t1 = inverse_power(M, lam0)
    lam2, t2 = inverse_power(M, lam0)
    assert lam1 == lam2
    assert t1.eta == t2.eta
    assert np.array_equal(t1.Y, t2.Y)
    lam3, t3 = inverse_power(M, lam0, seed=1)
    assert np.array_equal(t1.Y, t3.Y) is False or t1.eta != t3.eta


def test_inverse_power_residual_invariant():
    M = TridiagMatrix(power_law_profile(2, 100, 250))
    for k in (1, 60, 177, 250):
        lam0 = sturm_bisect(M, k)
        lam, trace = inverse_power(M, lam0)
        bound = 1e-13 * M.diag_entry(M.n)
        assert residual_inf(M, lam, trace.Y) <= bound


def test_inverse_power_validates_iters():
    M = b_matrix(3)
    with pytest.raises(ValueError):
        inverse_power(M, 3.9, max_iters=0)
