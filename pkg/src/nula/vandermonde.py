"""
Vandermonde algebra behind the small-``tau`` eigenvalue asymptotics.

For positions ``alpha`` the matrix ``C`` with columns ``alpha**0 ..
alpha**(K-1)`` has a QR factorization whose diagonal ``r_k`` controls the
eigenvalues of the Gram matrix as ``tau -> 0``:

    mu_m ~ (r_m^(r) r_m^(t) / (m-1)!)**2 * tau**(2(m-1))

and ``prod r_k**2 = det(C^T C)`` equals a sum of squared Vandermonde
determinants over all ``K``-subsets of the positions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .eig import spectrum
from .errors import DomainError, RankDeficientError

#: Largest array for which ``r_diagonals_closed_form`` enumerates subsets.
ENUMERATION_MAX_M = 20
#: Largest subset count accepted by ``f_MK(method="enumerate")``.
ENUMERATION_MAX_SUBSETS = 10_000_000


@dataclass(frozen=True)
class QrDiagonals:
    r: np.ndarray
    source_alphas: tuple


def vandermonde_matrix(alphas, K: int, dtype=float) -> np.ndarray:
    """``M x K`` matrix with entry ``(m, k) = alpha_m ** k`` (``k`` from 0)."""
    if K < 1:
        raise DomainError("K must be at least 1")
    a = np.asarray(alphas, dtype=dtype).ravel()
    return np.vander(a, K, increasing=True)


def _householder_qr(A):
    """Thin Householder QR with a non-negative diagonal, in A's dtype."""
    A = np.array(A)
    m, n = A.shape
    Q = np.eye(m, dtype=A.dtype)
    for k in range(min(m, n)):
        x = A[k:, k]
        nx = np.sqrt(np.sum(x * x))
        if nx == 0:
            continue
        alpha = -nx if x[0] >= 0 else nx
        v = x.copy()
        v[0] -= alpha
        vv = np.sum(v * v)
        if vv == 0:
            continue
        beta = 2 / vv
        A[k:, k:] -= np.outer(v, beta * (v @ A[k:, k:]))
        Q[:, k:] -= np.outer(Q[:, k:] @ v, beta * v)
    R = np.triu(A[:n, :])
    Q = Q[:, :n]
    signs = np.where(np.diag(R) < 0, -1, 1).astype(A.dtype)
    return Q * signs, R * signs[:, None]


def _distinct_count(a):
    return np.unique(np.asarray(a, dtype=float)).size


def qr_full(alphas, K: int):
    """QR factorization of the ``M x K`` Vandermonde matrix.

    Householder reflections are applied in ``np.longdouble`` (including
    the formation of the powers), which keeps about three extra digits in
    the small trailing diagonal entries of ``R``.  The diagonal of ``R`` is
    non-negative.

    Returns
    -------
    Q : ndarray, shape (M, K)
        Orthonormal columns.
    R : ndarray, shape (K, K)
        Upper triangular.
    """
    a = np.asarray(alphas, dtype=float).ravel()
    if K > a.size:
        raise DomainError(f"K={K} exceeds the number of positions {a.size}")
    if _distinct_count(a) < K:
        raise RankDeficientError(f"need {K} distinct positions, have {_distinct_count(a)}")
    Q, R = _householder_qr(vandermonde_matrix(a, K, dtype=np.longdouble))
    return Q.astype(float), R.astype(float)


def _r_from_qr_extended(a, K):
    _, R = _householder_qr(vandermonde_matrix(a, K, dtype=np.longdouble))
    return np.abs(np.diag(R))


def _squared_vandermonde(points):
    return math.prod((points[j] - points[i]) ** 2
                     for i, j in itertools.combinations(range(len(points)), 2))


def subset_sum(alphas, k: int) -> float:
    """Sum over ``k``-subsets of squared Vandermonde determinants.

    Subsets are visited in lexicographic order and summed with
    ``math.fsum``.  The empty subset contributes 1.
    """
    a = [float(x) for x in np.asarray(alphas, dtype=float).ravel()]
    if k == 0:
        return 1.0
    return math.fsum(_squared_vandermonde([a[i] for i in S])
                     for S in itertools.combinations(range(len(a)), k))


def r_diagonals_closed_form(alphas, K: int) -> QrDiagonals:
    """``r_1 .. r_K`` from ratios of subset sums.

    ``r_k = sqrt(S_k / S_{k-1})`` where ``S_k`` is :func:`subset_sum`; hence
    ``r_1 = sqrt(M)``.  For ``M > 20`` the enumeration is replaced by the
    diagonal of :func:`qr_full`.
    """
    a = np.asarray(alphas, dtype=float).ravel()
    if K > a.size:
        raise DomainError(f"K={K} exceeds the number of positions {a.size}")
    if a.size > ENUMERATION_MAX_M:
        distinct = min(K, _distinct_count(a))
        r = np.zeros(K)
        r[:distinct] = _r_from_qr_extended(a, distinct).astype(float)
        return QrDiagonals(r, tuple(a))
    sums = [subset_sum(a, k) for k in range(K + 1)]
    r = np.array([math.sqrt(sums[k] / sums[k - 1]) if sums[k - 1] > 0 else 0.0
                  for k in range(1, K + 1)])
    return QrDiagonals(r, tuple(a))


def f_MK(alphas, K: int, method: str = "determinant") -> float:
    """Sum of squared Vandermonde determinants over all ``K``-subsets.

    ``method="enumerate"`` visits the subsets directly.
    ``method="determinant"`` evaluates ``det(C^T C)`` for the ``M x K``
    Vandermonde matrix ``C`` as the product of the squared diagonal of its
    (extended precision) R factor, which is the stable way to form that
    Gram determinant.
    """
    a = np.asarray(alphas, dtype=float).ravel()
    M = a.size
    if not 1 <= K <= M:
        raise DomainError(f"K must lie in [1, {M}], got {K}")
    if method == "enumerate":
        if math.comb(M, K) > ENUMERATION_MAX_SUBSETS:
            raise DomainError(f"C({M}, {K}) subsets exceed the enumeration limit")
        return subset_sum(a, K)
    if method == "determinant":
        if _distinct_count(a) < K:
            return 0.0
        r = _r_from_qr_extended(a, K)
        return float(np.prod(r * r))
    raise ValueError(f"unknown method {method!r}")


class AsymptoticEigenvalue(NamedTuple):
    value: float
    rank_deficient: bool


def _r_diagonal(a, m):
    distinct = _distinct_count(a)
    if m > distinct:
        return 0.0
    return float(_r_from_qr_extended(a, m)[m - 1])


def asymptotic_eigenvalue(m: int, tau: float, layout_r, layout_t) -> AsymptoticEigenvalue:
    """Small-``tau`` approximation of the ``m``-th largest eigenvalue (1-based).

    ``(r_m^(r) r_m^(t) / (m-1)!)**2 * tau**(2(m-1))``; evaluated in log
    space when ``m > 15``.  Returns zero with ``rank_deficient=True`` when
    either side has fewer than ``m`` distinct positions.
    """
    ar = np.asarray(layout_r, dtype=float).ravel()
    at = np.asarray(layout_t, dtype=float).ravel()
    if not 1 <= m <= min(ar.size, at.size):
        raise DomainError(f"m must lie in [1, {min(ar.size, at.size)}], got {m}")
    rr, rt = _r_diagonal(ar, m), _r_diagonal(at, m)
    if rr == 0.0 or rt == 0.0:
        return AsymptoticEigenvalue(0.0, True)
    tau = abs(tau)
    if m > 15:
        log_value = 2 * (math.log(rr) + math.log(rt) - math.lgamma(m)
                         + (m - 1) * math.log(tau))
        return AsymptoticEigenvalue(math.exp(log_value), False)
    return AsymptoticEigenvalue((rr * rt / math.factorial(m - 1)) ** 2 * tau ** (2 * (m - 1)),
                                False)


def verify_theorem1_slopes(layout_r, layout_t, tau_grid, m_max: int = None) -> np.ndarray:
    """Least-squares slope of ``ln mu_m`` against ``ln tau`` for each ``m``.

    As ``tau -> 0`` the slope of the ``m``-th eigenvalue tends to
    ``2(m-1)``.  Only ``m`` up to the number of distinct positions on the
    sparser side are fitted (the rest are identically zero).
    """
    grid = np.asarray(tau_grid, dtype=float)
    if np.any(grid <= 0):
        raise DomainError("tau grid must be positive")
    rank = min(_distinct_count(layout_r), _distinct_count(layout_t))
    m_max = rank if m_max is None else min(m_max, rank)
    values = np.array([spectrum(layout_r, layout_t, t).values[:m_max] for t in grid])
    log_tau = np.log(grid)
    return np.array([np.polyfit(log_tau, np.log(values[:, m]), 1)[0] for m in range(m_max)])


def verify_theorem2_alignment(layout_r, layout_t, tau: float, m_max: int = None,
                              cluster_rtol: float = 1e-8) -> np.ndarray:
    """Overlap ``|<u_m, q_m>|`` between Gram eigenvectors and QR columns.

    ``q_m`` is the ``m``-th column of the orthonormal factor of the
    receive-side Vandermonde matrix.  When eigenvalues cluster within
    ``cluster_rtol`` the overlap is the norm of the projection of ``q_m``
    on the whole cluster's eigenspace.
    """
    ar = np.asarray(layout_r, dtype=float).ravel()
    rank = min(_distinct_count(ar), _distinct_count(layout_t))
    m_max = rank if m_max is None else min(m_max, rank)
    spec = spectrum(ar, layout_t, tau, with_vectors=True)
    Q, _ = qr_full(ar, m_max)
    mu = spec.values
    U = spec.eigenvectors
    overlaps = np.empty(m_max)
    for m in range(m_max):
        close = np.abs(mu - mu[m]) <= cluster_rtol * np.maximum(np.abs(mu), abs(mu[m]))
        proj = U[:, close].conj().T @ Q[:, m]
        overlaps[m] = float(np.linalg.norm(proj))
    return overlaps
