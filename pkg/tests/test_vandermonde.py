import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nula.eig import spectrum
from nula.errors import DomainError, RankDeficientError
from nula.vandermonde import (asymptotic_eigenvalue, f_MK, qr_full, r_diagonals_closed_form,
                              subset_sum, vandermonde_matrix, verify_theorem1_slopes,
                              verify_theorem2_alignment)

from conftest import random_layout

positions = st.lists(st.floats(-1, 1), min_size=1, max_size=8)


def _brute_f(alphas, K):
    # independent oracle: numpy determinant of each K x K Vandermonde minor
    total = 0.0
    for S in itertools.combinations(alphas, K):
        total += np.linalg.det(np.vander(np.array(S), K, increasing=True)) ** 2
    return total


def test_vandermonde_examples():
    np.testing.assert_array_equal(vandermonde_matrix([0.3, -0.2], 1), [[1], [1]])
    np.testing.assert_array_equal(vandermonde_matrix([-1, 1], 2), [[1, -1], [1, 1]])
    np.testing.assert_array_equal(vandermonde_matrix([0, 1, 2], 3),
                                  [[1, 0, 0], [1, 1, 1], [1, 2, 4]])
    with pytest.raises(DomainError):
        vandermonde_matrix([0.0], 0)


def test_qr_two_points():
    Q, R = qr_full([-1, 1], 2)
    np.testing.assert_allclose(np.diag(R), [math.sqrt(2), math.sqrt(2)], rtol=1e-15)
    np.testing.assert_allclose(Q @ R, [[1, -1], [1, 1]], atol=1e-15)


def test_qr_properties(rng):
    for M in (3, 8, 24):
        a = random_layout(rng, M)
        for K in range(1, min(M, 8) + 1):
            Q, R = qr_full(a, K)
            C = vandermonde_matrix(a, K)
            assert np.linalg.norm(Q @ R - C) <= 1e-10 * np.linalg.norm(C)
            np.testing.assert_allclose(Q.T @ Q, np.eye(K), atol=1e-12)
            assert np.all(np.diag(R) >= 0)
            assert R[0, 0] == pytest.approx(math.sqrt(M), rel=1e-12)
            np.testing.assert_array_equal(R, np.triu(R))


def test_qr_rank_deficient():
    with pytest.raises(RankDeficientError):
        qr_full([-1, -1, 1, 1], 3)
    with pytest.raises(DomainError):
        qr_full([-1, 1], 3)


def test_closed_form_examples():
    assert r_diagonals_closed_form([-1, 1], 2).r == pytest.approx([math.sqrt(2), math.sqrt(2)])
    r = r_diagonals_closed_form([-1, -0.2, 0.5, 1], 1).r
    assert r[0] == pytest.approx(2.0, rel=1e-15)


def test_closed_form_agrees_with_qr(rng):
    worst = 0.0
    for _ in range(50):
        M = int(rng.integers(2, 9))
        a = np.sort(rng.uniform(-1, 1, M))
        K = int(rng.integers(1, M + 1))
        cf = r_diagonals_closed_form(a, K).r
        _, R = qr_full(a, K)
        worst = max(worst, np.abs(cf - np.diag(R)).max())
    assert worst < 1e-10


def test_closed_form_zero_for_repeated_positions():
    r = r_diagonals_closed_form([-1, -1, 1, 1], 3).r
    assert r[2] == 0.0 and r[1] > 0


def test_closed_form_large_m_delegates():
    a = np.linspace(-1, 1, 30)
    r = r_diagonals_closed_form(a, 4).r
    np.testing.assert_allclose(r, np.diag(qr_full(a, 4)[1]), rtol=1e-12)


def test_f_examples():
    a = [-0.7, 0.1, 0.4, 0.9]
    assert f_MK(a, 1, "enumerate") == 4
    assert f_MK([-1, 1], 2, "enumerate") == pytest.approx(4.0)
    assert f_MK([-1, 1], 2) == pytest.approx(4.0)


def test_f_fekete_four_points():
    # squared Vandermonde determinant of the tabulated four-point Fekete set
    pts = [-1.0, -0.4472, 0.4472, 1.0]
    direct = math.prod((pts[j] - pts[i]) ** 2 for i, j in itertools.combinations(range(4), 2))
    assert direct == pytest.approx(1.311, abs=1e-3)
    assert f_MK(pts, 4, "enumerate") == pytest.approx(direct, rel=1e-14)


@given(positions, st.integers(1, 8))
def test_subset_sum_matches_determinant_oracle(a, K):
    a = sorted(a)
    if K > len(a):
        return
    ref = _brute_f(a, K)
    assert subset_sum(a, K) == pytest.approx(ref, rel=1e-9, abs=1e-13)


def test_cauchy_binet_identity(rng):
    worst = 0.0
    for _ in range(100):
        M = int(rng.integers(1, 9))
        a = np.sort(rng.uniform(-1, 1, M))
        for K in range(1, M + 1):
            e = f_MK(a, K, "enumerate")
            d = f_MK(a, K, "determinant")
            worst = max(worst, abs(e - d) / e)
    assert worst < 1e-10


@given(positions, st.integers(1, 6))
def test_f_invariances(a, K):
    if K > len(a):
        return
    a = np.array(a)
    base = f_MK(a, K, "enumerate")
    assert f_MK(a[::-1], K, "enumerate") == pytest.approx(base, rel=1e-12, abs=1e-300)
    assert f_MK(-a, K, "enumerate") == pytest.approx(base, rel=1e-12, abs=1e-300)
    assert f_MK(0.5 * a, K, "enumerate") == pytest.approx(0.5 ** (K * (K - 1)) * base,
                                                          rel=1e-12, abs=1e-300)


def test_f_zero_iff_too_few_distinct():
    a = [-1, -1, 0.5, 0.5, 0.5]
    assert f_MK(a, 3, "enumerate") == 0.0
    assert f_MK(a, 3, "determinant") == 0.0
    assert f_MK(a, 2, "enumerate") > 0


def test_f_guards():
    with pytest.raises(DomainError):
        f_MK(np.linspace(-1, 1, 60), 10, "enumerate")
    with pytest.raises(DomainError):
        f_MK([0.0], 2)
    with pytest.raises(ValueError):
        f_MK([0.0, 1.0], 1, "sum")


def test_asymptotic_first_eigenvalue():
    ar, at = np.linspace(-1, 1, 5), [-1, 0.3, 1]
    assert asymptotic_eigenvalue(1, 0.7, ar, at).value == pytest.approx(15.0, rel=1e-12)


def test_asymptotic_two_by_two():
    tau = 0.01
    approx = asymptotic_eigenvalue(2, tau, [-1, 1], [-1, 1])
    assert approx.value == pytest.approx(4 * tau ** 2, rel=1e-12)
    exact = 2 - 2 * math.cos(2 * tau)
    assert approx.value == pytest.approx(exact, rel=1e-4)


def test_asymptotic_rank_flag():
    res = asymptotic_eigenvalue(3, 0.1, [-1, -1, 1, 1], np.linspace(-1, 1, 4))
    assert res.value == 0.0 and res.rank_deficient


def test_asymptotic_log_space_branch():
    a = np.cos(np.linspace(0, math.pi, 18))[::-1]
    a[0], a[-1] = -1.0, 1.0
    v16 = asymptotic_eigenvalue(16, 0.5, a, a).value
    r = np.diag(qr_full(a, 16)[1])[15]
    assert v16 == pytest.approx((r * r / math.factorial(15)) ** 2 * 0.5 ** 30, rel=1e-10)


def test_asymptotic_accuracy_random_layouts(rng):
    for _ in range(10):
        ar, at = random_layout(rng, 6), random_layout(rng, 6)
        exact = spectrum(ar, at, 0.01).values
        for m in (1, 2, 3):
            approx = asymptotic_eigenvalue(m, 0.01, ar, at).value
            assert abs(approx / exact[m - 1] - 1) < 0.05


def test_trace_consistency_small_tau(rng):
    ar, at = random_layout(rng, 5), random_layout(rng, 4)
    tau = 1e-3
    total = sum(asymptotic_eigenvalue(m, tau, ar, at).value for m in range(1, 5))
    assert total <= 20 + 1e-4


def test_small_tau_eigenvalue_slopes(rng):
    ar, at = random_layout(rng, 6), random_layout(rng, 6)
    slopes = verify_theorem1_slopes(ar, at, np.geomspace(1e-2, 1e-1, 8), m_max=3)
    assert abs(slopes[0]) < 0.02
    assert slopes[1] == pytest.approx(2.0, rel=0.02)
    assert slopes[2] == pytest.approx(4.0, rel=0.02)
    with pytest.raises(DomainError):
        verify_theorem1_slopes(ar, at, [0.0, 0.1])


def test_alignment_two_elements_exact():
    for tau in (0.1, 0.5, 0.78):
        ov = verify_theorem2_alignment([-1, 1], [-1, 1], tau)
        np.testing.assert_allclose(ov, 1.0, atol=1e-12)


def test_alignment_improves_as_tau_shrinks(rng):
    ar, at = random_layout(rng, 6), random_layout(rng, 6)
    ov = verify_theorem2_alignment(ar, at, 1e-3, m_max=3)
    assert ov[0] > 0.999 and np.all(ov > 0.99)
    err_big = np.mean(1 - verify_theorem2_alignment(ar, at, 1e-1, m_max=3))
    err_small = np.mean(1 - verify_theorem2_alignment(ar, at, 1e-2, m_max=3))
    assert err_small <= err_big


def test_alignment_cluster_is_subspace():
    # at the Rayleigh point all eigenvalues coincide: every overlap is a full projection
    M = 4
    tau = math.pi * (M - 1) ** 2 / (2 * M)
    a = np.linspace(-1, 1, M)
    ov = verify_theorem2_alignment(a, a, tau)
    np.testing.assert_allclose(ov, 1.0, atol=1e-9)
