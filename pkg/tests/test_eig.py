import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nula.channel import build_hhat, ula_gram, ula_layout
from nula.eig import (RatioEvaluator, SearchConfig, Spectrum, eigenvalues_desc, emg, gram,
                      jacobi_eigh, max_achievable_emg, ratio_sweep, spectrum, tau_min_search)
from nula.errors import DomainError, NotAchievableError, NotHermitianError

from conftest import random_layout


def _random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A + A.conj().T


def test_gram_zero_tau_rank_one():
    G = gram(build_hhat([-1, 0.2, 1], [-1, 0.5, 0.7, 1], 0.0))
    np.testing.assert_array_equal(np.asarray(G, dtype=complex), np.full((3, 3), 4.0))
    spec = eigenvalues_desc(G)
    np.testing.assert_allclose(spec.values, [12.0, 0.0, 0.0], atol=1e-12)


def test_gram_is_exactly_hermitian(rng):
    G = gram(build_hhat(random_layout(rng, 7), random_layout(rng, 5), 1.3))
    assert np.array_equal(G, G.conj().T)


def test_two_element_gram_and_spectrum():
    tau = 0.41
    G = np.asarray(gram(build_hhat([-1, 1], [-1, 1], tau)), dtype=complex)
    c = 2 * math.cos(2 * tau)
    np.testing.assert_allclose(G, [[2, c], [c, 2]], atol=1e-15)
    np.testing.assert_allclose(eigenvalues_desc(G).values, [2 + c, 2 - c], rtol=1e-14)


def test_scaled_identity():
    np.testing.assert_allclose(eigenvalues_desc(5.0 * np.eye(4)).values, 5.0)


@pytest.mark.parametrize("n", [2, 5, 12])
def test_jacobi_matches_lapack(rng, n):
    G = _random_hermitian(rng, n)
    w, V = jacobi_eigh(G)
    w = np.asarray(w, dtype=float)
    V = np.asarray(V, dtype=complex)
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(G), atol=1e-12 * np.abs(G).max())
    np.testing.assert_allclose(V.conj().T @ V, np.eye(n), atol=1e-13)
    resid = np.linalg.norm(G @ V - V * w, axis=0)
    assert resid.max() <= 1e-10 * np.linalg.norm(G)


def test_eigenvector_residuals_on_channel(rng):
    G = gram(build_hhat(random_layout(rng, 10), random_layout(rng, 10), 0.9))
    spec = eigenvalues_desc(G, with_vectors=True)
    G64 = np.asarray(G, dtype=complex)
    U = spec.eigenvectors
    resid = np.linalg.norm(G64 @ U - U * spec.values, axis=0)
    assert resid.max() <= 1e-10 * np.linalg.norm(G64)


def test_non_hermitian_rejected():
    with pytest.raises(NotHermitianError):
        eigenvalues_desc(np.array([[1.0, 2.0], [0.0, 1.0]]))


@given(st.integers(2, 9), st.integers(2, 9), st.floats(-6, 6), st.integers(0, 2**31))
def test_spectrum_trace_and_sign_symmetry(M, N, tau, seed):
    r = np.random.default_rng(seed)
    ar, at = np.sort(r.uniform(-1, 1, M)), np.sort(r.uniform(-1, 1, N))
    a = spectrum(ar, at, tau).values
    b = eigenvalues_desc(gram(build_hhat(ar, at, -tau))).values
    assert math.fsum(a) == pytest.approx(M * N, rel=1e-9)
    np.testing.assert_allclose(a, b, atol=1e-9 * M * N)
    assert np.all(np.diff(a) <= 0) and np.all(a >= 0)


def test_small_eigenvalues_are_resolved():
    # lapack in double precision loses the third mode entirely at this tau
    u = ula_layout(24)
    mu = spectrum(u, u, 1e-3).values
    ref = spectrum(u, u, 1e-3, method="lapack").values
    assert mu[2] > 0
    assert mu[0] == pytest.approx(ref[0], rel=1e-12)
    assert mu[1] == pytest.approx(ref[1], rel=1e-6)


def test_unreliable_flag():
    spec = Spectrum(np.array([1.0, 1e-3, 1e-15]))
    assert spec.unreliable.tolist() == [False, False, True]


def test_emg_basic():
    assert emg(Spectrum(np.full(4, 3.0)), 0.9) == 4
    with pytest.raises(DomainError):
        emg(Spectrum(np.array([1.0, 0.5])), 0.0)
    with pytest.raises(DomainError):
        emg(Spectrum(np.array([1.0])), 1e-13)


def test_emg_ula_at_rayleigh():
    M = 8
    tau = math.pi * (M - 1) ** 2 / (2 * M)
    assert emg(spectrum(ula_layout(M), ula_layout(M), tau), 0.999) == M


def test_emg_two_groups_closed_form():
    # two groups at +-1 give mu2/mu1 = tan(tau)**2
    grouped = [-1.0] * 12 + [1.0] * 12
    assert math.tan(0.3063) ** 2 == pytest.approx(0.1, abs=1e-4)
    assert emg(spectrum(grouped, grouped, 0.3063), 0.1) == 2
    assert emg(spectrum(grouped, grouped, 0.3060), 0.1) == 1


def test_ratio_evaluator_matches_full_spectrum(rng):
    ar = np.sort(np.concatenate([random_layout(rng, 5), [0.1, 0.1, -0.4]]))
    at = random_layout(rng, 6)
    ev = RatioEvaluator(ar, at)
    for tau in (0.2, 1.1, 3.7):
        full = spectrum(ar, at, tau).values
        red = ev.eigenvalues([tau])[0]
        np.testing.assert_allclose(red, full[:red.size], rtol=1e-9, atol=1e-9 * full[0])


def test_ratio_sweep_two_groups_equals_tan_squared():
    grouped = [-1.0] * 4 + [1.0] * 4
    grid = np.linspace(0.05, 0.7, 14)
    rows = ratio_sweep(grouped, grouped, 2, grid)
    np.testing.assert_array_equal(rows[:, 0], grid)
    np.testing.assert_allclose(rows[:, 1], np.tan(grid) ** 2, rtol=1e-10)


def test_ratio_sweep_scale_free_and_threads(rng):
    ar, at = random_layout(rng, 7), random_layout(rng, 7)
    grid = np.linspace(0.01, 3.0, 600)
    serial = ratio_sweep(at, ar, 3, grid)
    threaded = ratio_sweep(at, ar, 3, grid, threads=3)
    np.testing.assert_array_equal(serial, threaded)
    assert serial[0, 1] < 1e-6
    with pytest.raises(DomainError):
        ratio_sweep(at, ar, 2, [0.5, 0.4])


@pytest.mark.parametrize("gamma", [0.1, 0.02, 1e-3])
def test_two_group_taumin_closed_form(gamma):
    grouped = [-1.0, -1.0, 1.0, 1.0]
    res = tau_min_search(grouped, grouped, 2, gamma)
    assert res.tau_min == pytest.approx(math.atan(math.sqrt(gamma)), abs=1e-10)
    lo, hi = res.bracket
    assert lo <= res.tau_min <= hi and hi - lo <= 1e-12


def test_taumin_ula_24():
    u = ula_layout(24)
    assert tau_min_search(u, u, 2, 0.1).tau_min == pytest.approx(0.8776, abs=1e-3)


def test_taumin_bracket_is_true_crossing(rng):
    ar, at = random_layout(rng, 6), random_layout(rng, 6)
    cfg = SearchConfig()
    res = tau_min_search(at, ar, 3, 0.05, cfg)
    assert emg(spectrum(ar, at, res.tau_min), 0.05) >= 3
    assert emg(spectrum(ar, at, res.tau_min - 2 * cfg.tol - 1e-9), 0.05) < 3


def test_taumin_refinement_is_monotone(rng):
    ar, at = random_layout(rng, 8), random_layout(rng, 8)
    coarse = tau_min_search(at, ar, 3, 0.1, SearchConfig(step=2e-2))
    fine = tau_min_search(at, ar, 3, 0.1, SearchConfig(step=1e-2))
    assert fine.tau_min <= coarse.tau_min + 2e-2


def test_taumin_not_achievable():
    u = ula_layout(6)
    with pytest.raises(NotAchievableError) as info:
        tau_min_search(u, u, 6, 0.5, SearchConfig(tau_max=0.5))
    assert info.value.K == 6 and info.value.best_ratio < 0.5


def test_taumin_k1_and_bad_k():
    u = ula_layout(4)
    assert tau_min_search(u, u, 1, 0.1).tau_min == 0.0
    with pytest.raises(DomainError):
        tau_min_search(u, u, 5, 0.1)


def test_max_achievable_emg():
    grid = np.linspace(0.01, 4.0, 400)
    assert max_achievable_emg([0.0], ula_layout(5), 0.1, grid) == 1
    grouped = np.repeat([-1.0, 0.0, 1.0], 4)
    assert max_achievable_emg(grouped, grouped, 1e-4, grid) == 3
    M = 4
    tau = math.pi * (M - 1) ** 2 / (2 * M)
    assert max_achievable_emg(ula_layout(M), ula_layout(M), 0.99, [tau]) == M


def test_ula_gram_eigenvalues_agree():
    G = ula_gram(6, 6, 1.2)
    np.testing.assert_allclose(eigenvalues_desc(G).values,
                               spectrum(ula_layout(6), ula_layout(6), 1.2).values,
                               rtol=1e-10, atol=1e-10)
