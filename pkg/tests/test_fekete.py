import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import legendre

from nula.errors import DomainError
from nula.fekete import (fekete_certificate, fekete_points, gradient_log_fKK, lagrange_basis,
                         objective_log_fKK)

TABLE = {
    2: [-1, 1],
    3: [-1, 0, 1],
    4: [-1, -0.4472, 0.4472, 1],
    5: [-1, -0.6547, 0, 0.6547, 1],
    6: [-1, -0.7651, -0.2852, 0.2852, 0.7651, 1],
    7: [-1, -0.8302, -0.4688, 0, 0.4688, 0.8302, 1],
    8: [-1, -0.8717, -0.5917, -0.2093, 0.2093, 0.5917, 0.8717, 1],
    9: [-1, -0.8998, -0.6772, -0.3631, 0, 0.3631, 0.6772, 0.8998, 1],
    10: [-1, -0.9195, -0.7388, -0.4779, -0.1653, 0.1653, 0.4779, 0.7388, 0.9195, 1],
}


def _gauss_lobatto(K):
    # interior nodes are the roots of P'_{K-1}
    c = np.zeros(K)
    c[-1] = 1.0
    inner = np.sort(legendre.legroots(legendre.legder(c)).real)
    return np.concatenate([[-1.0], inner, [1.0]])


def test_objective_two_points():
    assert objective_log_fKK([-1, 1]) == pytest.approx(2 * math.log(2))


def test_gradient_symmetric_middle():
    assert gradient_log_fKK([-1, 0, 1])[1] == 0.0


def test_coincident_points_rejected():
    with pytest.raises(DomainError):
        objective_log_fKK([-1, 0, 0, 1])
    with pytest.raises(DomainError):
        gradient_log_fKK([1, -1])


@given(st.integers(3, 12), st.integers(0, 2**31))
def test_gradient_matches_finite_differences(K, seed):
    r = np.random.default_rng(seed)
    x = np.sort(r.uniform(-1, 1, K))
    if np.diff(x).min() < 1e-3:
        return
    g = gradient_log_fKK(x)
    h = 1e-6
    fd = np.empty(K)
    for k in range(K):
        xp, xm = x.copy(), x.copy()
        xp[k] += h
        xm[k] -= h
        fd[k] = (objective_log_fKK(xp) - objective_log_fKK(xm)) / (2 * h)
    assert np.linalg.norm(fd - g) <= 1e-5 * np.linalg.norm(g)


@pytest.mark.parametrize("K", sorted(TABLE))
def test_matches_table(K):
    sol = fekete_points(K)
    np.testing.assert_allclose(sol.points, TABLE[K], atol=5e-4)


@pytest.mark.parametrize("K", range(2, 25))
def test_matches_gauss_lobatto_nodes(K):
    sol = fekete_points(K)
    np.testing.assert_allclose(sol.points, _gauss_lobatto(K), atol=1e-9)
    assert sol.gradient_norm < 1e-10
    assert sol.points[0] == -1.0 and sol.points[-1] == 1.0
    np.testing.assert_array_equal(sol.points, -sol.points[::-1])
    assert sol.objective == pytest.approx(math.exp(objective_log_fKK(sol.points)))


def test_domain():
    for K in (1, 25):
        with pytest.raises(DomainError):
            fekete_points(K)


@pytest.mark.parametrize("K", [4, 7, 12])
def test_local_maximum_against_perturbations(rng, K):
    sol = fekete_points(K)
    best = objective_log_fKK(sol.points)
    for _ in range(1000):
        p = sol.points.copy()
        p[1:-1] += rng.uniform(-0.05, 0.05, K - 2)
        if np.any(np.diff(p) <= 0):
            continue
        assert objective_log_fKK(p) <= best + 1e-12


def test_lagrange_basis_properties(rng):
    pts = fekete_points(6).points
    np.testing.assert_allclose(lagrange_basis(pts, pts[2]), np.eye(6)[2], atol=1e-15)
    xs = rng.uniform(-1, 1, 1000)
    np.testing.assert_allclose(lagrange_basis(pts, xs).sum(axis=-1), 1.0, atol=1e-12)
    x = 0.3
    np.testing.assert_allclose(lagrange_basis([-1, 1], x), [(1 - x) / 2, (1 + x) / 2])
    with pytest.raises(DomainError):
        lagrange_basis([0.1, 0.1], 0.0)


def test_certificate():
    assert fekete_certificate([-1, 1]) == pytest.approx(1.0, abs=1e-15)
    assert fekete_certificate(TABLE[4]) == pytest.approx(1.0, abs=1e-6)
    assert fekete_certificate(np.linspace(-1, 1, 5)) > 1 + 1e-4
    for K in range(4, 11):
        assert fekete_certificate(np.linspace(-1, 1, K)) > 1 + 1e-4
        assert fekete_certificate(fekete_points(K).points) == pytest.approx(1.0, abs=1e-6)
