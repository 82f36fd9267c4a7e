"""
Fekete points on ``[-1, 1]``.

The ``K`` points maximizing the squared Vandermonde determinant
``f = prod_{i<j} (a_j - a_i)**2`` with the endpoints fixed at ``+-1``.
They coincide with the Gauss-Lobatto nodes, but here they are computed
directly by steepest ascent on ``log f`` so that the optimizer itself can
be tested against that independent characterization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError

K_MAX = 24


@dataclass(frozen=True)
class FeketeSolution:
    """Converged Fekete configuration.

    Attributes
    ----------
    K : int
    points : ndarray
        Ascending, ``points[0] = -1`` and ``points[-1] = 1``.
    objective : float
        ``f_{K,K}``, the squared Vandermonde determinant.
    gradient_norm : float
        Euclidean norm of the interior gradient of ``log f`` at exit.
    iterations : int
    """

    K: int
    points: np.ndarray
    objective: float
    gradient_norm: float
    iterations: int


def _pairwise(points):
    a = np.asarray(points, dtype=float).ravel()
    diff = a[None, :] - a[:, None]
    iu = np.triu_indices(a.size, 1)
    if np.any(diff[iu] <= 0):
        raise DomainError("points must be strictly increasing")
    return a, diff


def objective_log_fKK(points) -> float:
    """``log f = 2 * sum_{i<j} ln(a_j - a_i)`` for strictly increasing points."""
    a, diff = _pairwise(points)
    iu = np.triu_indices(a.size, 1)
    return float(2.0 * np.sum(np.log(diff[iu])))


def gradient_log_fKK(points) -> np.ndarray:
    """Gradient of :func:`objective_log_fKK`: ``2 * sum_{i != k} 1 / (a_k - a_i)``."""
    a, diff = _pairwise(points)
    d = -diff  # d[k, i] = a_k - a_i
    np.fill_diagonal(d, np.inf)
    return 2.0 * np.sum(1.0 / d, axis=1)


def _cgl(K):
    return np.sort(np.cos(np.arange(K) * math.pi / (K - 1)))


def fekete_points(K: int, tol: float = 1e-10, max_iter: int = 100_000) -> FeketeSolution:
    """Steepest ascent on ``log f`` over the interior points.

    Starts from the Chebyshev-Gauss-Lobatto nodes, takes gradient steps
    with Armijo backtracking (shrink 0.5, sufficient-increase constant
    1e-4).  Each line search starts from the Barzilai-Borwein length of
    the previous step, which adapts the step to the local curvature.
    Steps that would break the ordering are rejected like failed Armijo
    steps.  Once the Armijo increase falls below the rounding level of
    ``log f`` a step is accepted when the directional derivative at the
    trial point is still non-negative, which is valid because ``log f`` is
    concave in the interior points.  The result is symmetrized about 0.

    Raises
    ------
    DomainError
        ``K`` outside ``[2, 24]``.
    ConvergenceError
        Gradient norm still above ``tol`` after ``max_iter`` steps.
    """
    if not 2 <= K <= K_MAX:
        raise DomainError(f"K must lie in [2, {K_MAX}], got {K}")
    x = _cgl(K)
    x[0], x[-1] = -1.0, 1.0
    if K == 2:
        return FeketeSolution(2, x, 4.0, 0.0, 0)

    f = objective_log_fKK(x)
    g = gradient_log_fKK(x)[1:-1]
    gnorm = float(np.linalg.norm(g))
    step = 1.0 / max(gnorm, 1.0)
    it = 0
    while gnorm >= tol:
        if it >= max_iter:
            raise ConvergenceError(f"Fekete solver stopped at |grad|={gnorm:.3g} after {it} steps")
        it += 1
        while True:
            trial = x.copy()
            trial[1:-1] += step * g
            if np.all(np.diff(trial) > 0):
                ft = objective_log_fKK(trial)
                if ft >= f + 1e-4 * step * gnorm ** 2:
                    break
                # log f is concave in the interior points, so near the optimum
                # where the increase drowns in roundoff a non-negative
                # directional derivative still certifies an uphill step
                if abs(ft - f) <= 64 * np.finfo(float).eps * abs(f) + 1e-300:
                    if gradient_log_fKK(trial)[1:-1] @ g >= 0:
                        break
            step *= 0.5
            if step < 1e-300:
                raise ConvergenceError("line search failed to find an ascent step")
        g_new = gradient_log_fKK(trial)[1:-1]
        s_k, y_k = trial[1:-1] - x[1:-1], g - g_new
        curv = float(s_k @ y_k)
        # Barzilai-Borwein trial length, falling back to doubling
        step = float(s_k @ s_k) / curv if curv > 0 else 2.0 * step
        x, f, g = trial, ft, g_new
        gnorm = float(np.linalg.norm(g))

    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    return FeketeSolution(K, x, math.exp(objective_log_fKK(x)), gnorm, it)


def lagrange_basis(points, x: float) -> np.ndarray:
    """Cardinal Lagrange polynomials of ``points`` evaluated at ``x``."""
    p = np.asarray(points, dtype=float).ravel()
    if np.unique(p).size != p.size:
        raise DomainError("interpolation points must be distinct")
    xs = np.asarray(x, dtype=float)
    out = np.ones(xs.shape + (p.size,))
    for k in range(p.size):
        for i in range(p.size):
            if i != k:
                out[..., k] *= (xs - p[i]) / (p[k] - p[i])
    return out


def fekete_certificate(points, n_grid: int = 100_001) -> float:
    """Maximum of ``sum_k l_k(x)**2`` over a uniform grid on ``[-1, 1]``.

    Equals 1 exactly for Fekete points and exceeds 1 for any other set.
    The grid includes the end points.
    """
    x = np.linspace(-1.0, 1.0, n_grid)
    basis = lagrange_basis(points, x)
    return float(np.max(np.sum(basis * basis, axis=-1)))
