"""
Projected-arch-type (PAT) points and groupwise antenna deployments.

PAT points place ``K`` points uniformly on a circular arc of angle ``theta``
and project them onto the chord, scaled so the ends land on ``+-1``.  A
single parameter sweeps from uniform spacing (``theta -> 0``) towards
endpoint-clustered sets that approximate the Fekete points.

A groupwise deployment splits ``M`` antennas into ``K`` nearly equal groups
placed around ``K`` centre positions, with a fixed normalized spacing inside
each group.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np

from .eig import SearchConfig, tau_min_search
from .errors import DomainError, InfeasibleDeploymentError, NotAchievableError
from .fekete import fekete_points
from .geometry import ArrayLayout

#: Search range used by the theta study; large enough for K <= 10 at -10 dB.
THETA_SEARCH_CONFIG = SearchConfig(tau_max=16.0)
THETA_GRID_STEP = 0.02
FIT_BOUNDS = (0.1, math.pi)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(fn, a, b, tol=1e-10):
    """Golden-section minimization of a unimodal ``fn`` on ``[a, b]``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def pat_points(K: int, theta: float) -> np.ndarray:
    """``sin((2k-1-K) theta / (2(K-1))) / sin(theta / 2)`` for ``k = 1..K``.

    ``theta = 0`` gives the uniform limit ``(2k-1-K)/(K-1)``.  The end
    points are exactly ``-1`` and ``+1``.
    """
    if K < 2:
        raise DomainError(f"PAT points need K >= 2, got {K}")
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    j = 2.0 * np.arange(1, K + 1) - 1 - K
    if theta == 0.0:
        pts = j / (K - 1)
    else:
        denom = math.sin(theta / 2.0)
        if abs(denom) < 1e-12:
            raise DomainError(f"sin(theta/2) vanishes at theta={theta!r}")
        pts = np.sin(j * theta / (2.0 * (K - 1))) / denom
    pts[0], pts[-1] = -1.0, 1.0
    return pts


@lru_cache(maxsize=None)
def _fekete_cached(K):
    return fekete_points(K).points


class ThetaFit(NamedTuple):
    theta: float
    residual: float
    degenerate: bool


def fit_theta(K: int, fekete=None) -> ThetaFit:
    """Arc angle whose PAT points best match the Fekete points.

    Minimizes ``||fekete - pat_points(K, theta)||_2`` by golden section on
    ``[0.1, pi]``.  For ``K <= 3`` every angle is exact; the result is then
    flagged ``degenerate`` with ``theta = nan`` and zero residual.

    Parameters
    ----------
    K : int
    fekete : FeketeSolution or array_like, optional
        Target points; computed with :func:`fekete_points` if omitted.
    """
    if K < 2:
        raise DomainError(f"K must be at least 2, got {K}")
    if K <= 3:
        return ThetaFit(float("nan"), 0.0, True)
    if fekete is None:
        target = _fekete_cached(K)
    else:
        target = np.asarray(getattr(fekete, "points", fekete), dtype=float)
    if target.size != K:
        raise DomainError("fekete points do not match K")
    theta, res = _golden_min(lambda t: float(np.linalg.norm(target - pat_points(K, t))),
                             *FIT_BOUNDS)
    return ThetaFit(theta, res, False)


@dataclass(frozen=True, eq=False)
class GroupwiseDeployment:
    """Antennas split into ``K`` groups around centre positions.

    Attributes
    ----------
    M, K : int
    centers : ndarray
        Requested group centres.
    effective_centers : ndarray
        Centres after edge groups are shifted inside ``[-1, 1]``.
    intra_spacing : float
        Normalized spacing ``delta`` between neighbours of one group.
    alphas : ArrayLayout
    group_sizes : tuple of int
    """

    M: int
    K: int
    centers: np.ndarray
    effective_centers: np.ndarray
    intra_spacing: float
    alphas: ArrayLayout
    group_sizes: tuple

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.alphas, dtype=dtype)


def group_assignment(M: int, K: int) -> np.ndarray:
    """Group index ``ceil(m K / M)`` (1-based) of antennas ``m = 1..M``."""
    m = np.arange(1, M + 1)
    return -(-(m * K) // M)


def normalized_spacing(spacing: float, aperture: float) -> float:
    """Physical spacing expressed in units of the half aperture ``L / 2``."""
    if aperture <= 0:
        raise DomainError("aperture must be positive")
    return spacing / (aperture / 2.0)


def groupwise_deploy(M: int, K: int, centers, delta: float = 0.0) -> GroupwiseDeployment:
    """Place ``M`` antennas in ``K`` groups around ``centers``.

    Antenna ``m`` joins group ``ceil(m K / M)``.  Members of a group are
    spaced by ``delta`` and centred on the group centre, except that a
    group poking out of ``[-1, 1]`` is moved inward until its outermost
    antenna sits on the boundary.

    Raises
    ------
    InfeasibleDeploymentError
        Groups overlap after shifting or a group is wider than the
        aperture.
    """
    c = np.asarray(centers, dtype=float).ravel()
    if K < 1 or c.size != K:
        raise DomainError(f"need K={K} centres, got {c.size}")
    if M < K:
        raise DomainError(f"M={M} is smaller than K={K}")
    if not (math.isfinite(delta) and delta >= 0):
        raise DomainError("delta must be a finite non-negative number")
    if np.any(np.abs(c) > 1) or np.any(np.diff(c) <= 0):
        raise DomainError("centres must be strictly increasing inside [-1, 1]")

    sizes = np.bincount(group_assignment(M, K), minlength=K + 1)[1:]
    half = (sizes - 1) * delta / 2.0
    if np.any(2 * half > 2.0):
        raise InfeasibleDeploymentError(f"a group of {sizes.max()} antennas at spacing "
                                        f"{delta:g} is wider than the aperture")
    eff = np.clip(c, -1.0 + half, 1.0 - half)
    groups = [eff[k] + (np.arange(sizes[k]) - (sizes[k] - 1) / 2.0) * delta
              for k in range(K)]
    for k in range(K - 1):
        if groups[k][-1] >= groups[k + 1][0]:
            raise InfeasibleDeploymentError(
                f"groups {k + 1} and {k + 2} overlap at spacing {delta:g}")
    alphas = np.clip(np.concatenate(groups), -1.0, 1.0)
    return GroupwiseDeployment(M, K, c, eff, float(delta), ArrayLayout(alphas),
                               tuple(int(s) for s in sizes))


def groupwise_fekete_deploy(M: int, K: int, delta: float = 0.0) -> GroupwiseDeployment:
    """Groupwise deployment centred on the ``K`` Fekete points."""
    centers = np.array([0.0]) if K == 1 else _fekete_cached(K)
    return groupwise_deploy(M, K, centers, delta)


def groupwise_pat_deploy(M: int, K: int, theta: float, delta: float = 0.0) -> GroupwiseDeployment:
    """Groupwise deployment centred on PAT points of angle ``theta``."""
    return groupwise_deploy(M, K, pat_points(K, theta), delta)


def pat_taumin(M: int, N: int, K: int, gamma: float, theta: float, delta: float = 0.0,
               cfg: Optional[SearchConfig] = None) -> float:
    """``tau_min`` of groupwise PAT deployments with angle ``theta`` on both sides."""
    layout_r = groupwise_pat_deploy(M, K, theta, delta).alphas
    layout_t = groupwise_pat_deploy(N, K, theta, delta).alphas
    return tau_min_search(layout_t, layout_r, K, gamma, cfg).tau_min


def default_theta_grid() -> np.ndarray:
    """``0, 0.02, ..., 3.12``: 157 angles covering ``[0, pi)``."""
    return THETA_GRID_STEP * np.arange(157)


class ThetaOptimum(NamedTuple):
    theta_star: float
    tau_min: float


def optimize_theta_for_taumin(M: int, N: int, K: int, gamma: float, theta_grid=None,
                              delta: float = 0.0,
                              cfg: Optional[SearchConfig] = None) -> ThetaOptimum:
    """PAT angle minimizing ``tau_min`` of the groupwise PAT deployment.

    Both arrays use the same angle.  Grid angles are visited in increasing
    order, and the search range of each one is cut at the best ``tau_min``
    found so far, so only strict improvements are kept (ties go to the
    smaller angle).  The best grid angle is then refined by golden section
    on its neighbouring grid interval to ``1e-4``; the refinement is kept
    only if it improves on the grid value.

    Raises
    ------
    NotAchievableError
        No angle reaches EMG ``K`` within ``cfg.tau_max``.
    """
    cfg = cfg or THETA_SEARCH_CONFIG
    grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    if grid.size == 0:
        raise DomainError("empty theta grid")
    best_i, best_tau = -1, math.inf
    for i, theta in enumerate(grid):
        # one extra grid step so a crossing just below best_tau is still bracketed
        limit = min(cfg.tau_max, best_tau + cfg.step)
        try:
            tau = pat_taumin(M, N, K, gamma, theta, delta,
                              SearchConfig(cfg.step, limit, cfg.bisection_steps, cfg.tol,
                                           cfg.method, cfg.chunk))
        except NotAchievableError:
            continue
        if tau < best_tau:
            best_i, best_tau = i, tau
    if best_i < 0:
        raise NotAchievableError(K, gamma, (0.0, cfg.tau_max), float("nan"))

    theta_star = float(grid[best_i])
    lo = grid[best_i - 1] if best_i > 0 else grid[best_i]
    hi = grid[best_i + 1] if best_i + 1 < grid.size else grid[best_i]
    if hi > lo:
        def objective(t):
            try:
                return pat_taumin(M, N, K, gamma, t, delta, cfg)
            except (NotAchievableError, DomainError):
                return math.inf
        t_ref, tau_ref = _golden_min(objective, float(lo), float(hi), tol=1e-4)
        if tau_ref < best_tau:
            theta_star, best_tau = float(t_ref), tau_ref
    return ThetaOptimum(theta_star, best_tau)


def theta_sweep(M: int, N: int, K: int, gamma: float, theta_grid=None, delta: float = 0.0,
                cfg: Optional[SearchConfig] = None, threads: int = 1) -> np.ndarray:
    """Rows ``(theta, tau_min)`` over a grid of angles; ``nan`` where not achievable.

    Angles are evaluated independently (optionally on ``threads`` worker
    threads) and returned in grid order.
    """
    cfg = cfg or THETA_SEARCH_CONFIG
    grid = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)

    def one(theta):
        try:
            return pat_taumin(M, N, K, gamma, float(theta), delta, cfg)
        except NotAchievableError:
            return float("nan")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            taus = list(pool.map(one, grid))
    else:
        taus = [one(t) for t in grid]
    return np.column_stack([grid, np.asarray(taus, dtype=float)])
