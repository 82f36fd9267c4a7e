"""
Eigen-analysis of the channel Gram matrix.

The Gram matrix is formed in extended precision and diagonalized with a
cyclic complex Jacobi method, which keeps the tiny eigenvalues that appear
at small ``tau`` (they scale like ``tau**(2(m-1))``) well above rounding.
Dense scans over ``tau`` grids go through :class:`RatioEvaluator`, which
collapses repeated antenna positions and calls LAPACK in batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelMatrix, build_hhat
from .errors import ConvergenceError, DomainError, NotAchievableError, NotHermitianError

#: Thresholds below this (-120 dB) are lost in the rounding of the Gram matrix.
GAMMA_FLOOR = 1e-12
#: Eigenvalues below ``UNRELIABLE_RATIO * mu_1`` are flagged as unreliable.
UNRELIABLE_RATIO = 1e-13


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Descending eigenvalues of a Gram matrix.

    Attributes
    ----------
    values : ndarray
        Non-negative eigenvalues, largest first.
    eigenvectors : ndarray or None
        Unitary matrix whose columns match ``values``.
    unreliable : ndarray of bool
        Mask of eigenvalues below ``1e-13 * values[0]``.
    """

    values: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    unreliable: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.unreliable is None:
            top = self.values[0] if self.values.size else 0.0
            object.__setattr__(self, "unreliable", self.values < UNRELIABLE_RATIO * top)

    def __len__(self):
        return self.values.size

    def ratios(self) -> np.ndarray:
        """``mu_m / mu_1`` for every ``m``."""
        return self.values / self.values[0]


@dataclass(frozen=True)
class SearchConfig:
    """Grid-then-bisection settings for :func:`tau_min_search`.

    The grid is ``step, 2*step, ..., tau_max``.  After the first grid point
    that reaches the target, the crossing is bisected ``bisection_steps``
    times or until the bracket is narrower than ``tol``.
    """

    step: float = 1e-3
    tau_max: float = 4.0
    bisection_steps: int = 40
    tol: float = 1e-12
    method: str = "lapack"
    chunk: int = 256

    def grid(self) -> np.ndarray:
        n = int(math.floor(self.tau_max / self.step + 1e-9))
        return self.step * np.arange(1, n + 1)


@dataclass(frozen=True)
class TauMinResult:
    tau_min: float
    K: int
    gamma: float
    bracket: tuple
    ratio_at_tau: float


def gram(H, extended: bool = True) -> np.ndarray:
    """Hermitian Gram matrix ``H H^H``.

    With ``extended`` (default) the product is accumulated in
    ``np.clongdouble`` and returned in that precision.
    """
    entries = H.entries if isinstance(H, ChannelMatrix) else np.asarray(H)
    dtype = np.clongdouble if extended else np.complex128
    A = entries.astype(dtype)
    G = A @ A.conj().T
    upper = np.triu(G, 1)
    return upper + upper.conj().T + np.diag(np.real(np.diag(G)).astype(dtype))


def _check_hermitian(G):
    scale = np.sqrt(np.sum(np.abs(G) ** 2))
    asym = np.sqrt(np.sum(np.abs(G - G.conj().T) ** 2))
    if asym > 1e-12 * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(f"matrix is not Hermitian (relative asymmetry {float(asym / scale):.3g})")


def _off_norm(A):
    return np.sqrt(np.sum(np.abs(A - np.diag(np.diag(A))) ** 2))


def jacobi_eigh(G, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of ``G[p, q]`` with a diagonal
    unitary and then applies the real symmetric 2x2 Jacobi rotation.
    Iteration stops once the off-diagonal Frobenius mass drops below
    ``tol * ||G||_F``.  Work is done in ``np.clongdouble``.

    Returns
    -------
    w : ndarray
        Eigenvalues (unsorted, real, extended precision).
    V : ndarray
        Unitary matrix of eigenvectors as columns.
    """
    A = np.array(G, dtype=np.clongdouble)
    n = A.shape[0]
    V = np.eye(n, dtype=np.clongdouble)
    norm = np.sqrt(np.sum(np.abs(A) ** 2))
    if n < 2 or norm == 0:
        return np.real(np.diag(A)), V
    target = tol * norm
    one = np.longdouble(1)

    for _ in range(max_sweeps):
        off = _off_norm(A)
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                d = np.conj(apq) / r
                zeta = (A[q, q].real - A[p, p].real) / (2 * r)
                t = (one if zeta >= 0 else -one) / (abs(zeta) + np.sqrt(one + zeta * zeta))
                c = one / np.sqrt(one + t * t)
                s = t * c
                # U[p,p]=c, U[q,p]=-s d, U[p,q]=s, U[q,q]=c d
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * d * col_q
                A[:, q] = s * col_p + c * d * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * np.conj(d) * row_q
                A[q, :] = s * row_p + c * np.conj(d) * row_q
                A[p, q] = 0
                A[q, p] = 0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                v_p = V[:, p].copy()
                v_q = V[:, q]
                V[:, p] = c * v_p - s * d * v_q
                V[:, q] = s * v_p + c * d * v_q
    else:
        off = _off_norm(A)
        if off > target:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.real(np.diag(A)), V


def eigenvalues_desc(G, with_vectors: bool = False, method: str = "jacobi") -> Spectrum:
    """Eigenvalues of a Hermitian matrix, largest first.

    ``method="jacobi"`` uses :func:`jacobi_eigh` in extended precision;
    ``method="lapack"`` calls ``numpy.linalg.eigh`` in double precision.
    Small negative eigenvalues (above ``-1e-10 * mu_1``) are rounding and
    are clamped to zero.
    """
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("expected a square matrix")
    _check_hermitian(G)
    if method == "jacobi":
        w, V = jacobi_eigh(G)
    elif method == "lapack":
        G64 = G.astype(np.complex128)
        if with_vectors:
            w, V = np.linalg.eigh(G64)
        else:
            w, V = np.linalg.eigvalsh(G64), None
    else:
        raise ValueError(f"unknown eigensolver {method!r}")

    order = np.argsort(-np.asarray(w, dtype=float), kind="stable")
    values = np.asarray(w, dtype=float)[order]
    if values.size and values[0] > 0:
        tiny = (values < 0) & (values >= -1e-10 * values[0])
        values[tiny] = 0.0
    vectors = None
    if with_vectors:
        vectors = np.asarray(V)[:, order].astype(np.complex128)
    return Spectrum(values, vectors)


def spectrum(layout_r, layout_t, tau: float, with_vectors: bool = False,
             method: str = "jacobi") -> Spectrum:
    """Shortcut for ``eigenvalues_desc(gram(build_hhat(...)))``; uses ``abs(tau)``."""
    H = build_hhat(layout_r, layout_t, abs(tau))
    return eigenvalues_desc(gram(H), with_vectors=with_vectors, method=method)


def check_gamma(gamma: float):
    if not (0 < gamma <= 1):
        raise DomainError(f"gamma must lie in (0, 1], got {gamma!r}")
    if gamma < GAMMA_FLOOR:
        raise DomainError("gamma below -120 dB is beneath the numerical floor")


def emg(spec: Spectrum, gamma: float) -> int:
    """Effective multiplexing gain: how many ``mu_m / mu_1 >= gamma``."""
    check_gamma(gamma)
    if len(spec) == 0:
        raise DomainError("empty spectrum")
    if spec.values[0] <= 0:
        raise DomainError("spectrum has no positive eigenvalue")
    return int(np.count_nonzero(spec.values / spec.values[0] >= gamma))


class RatioEvaluator:
    """Vectorized ``mu_K(tau) / mu_1(tau)`` for a fixed pair of layouts.

    Antennas sharing a position are merged into one weighted element: if
    ``u`` are the distinct positions with multiplicities ``c``, the non-zero
    eigenvalues of ``Hhat Hhat^H`` equal those of
    ``diag(sqrt c_r) E diag(c_t) E^H diag(sqrt c_r)`` with
    ``E = exp(j tau u_r u_t^T)``.  The smaller side is used, so grouped
    deployments reduce to ``K x K`` problems.
    """

    def __init__(self, layout_r, layout_t, method: str = "lapack"):
        ur, cr = np.unique(np.asarray(layout_r, dtype=float), return_counts=True)
        ut, ct = np.unique(np.asarray(layout_t, dtype=float), return_counts=True)
        if ur.size > ut.size:
            ur, cr, ut, ct = ut, ct, ur, cr
        self.u_small, self.u_large = ur, ut
        self.w_small = np.sqrt(cr.astype(float))
        self.c_large = ct.astype(float)
        self.rank = ur.size
        self.min_size = min(int(np.sum(cr)), int(np.sum(ct)))
        self.method = method

    def _gram_batch(self, taus, dtype=np.complex128):
        taus = np.asarray(taus, dtype=float)
        phase = np.multiply.outer(taus, np.outer(self.u_small, self.u_large))
        F = (np.exp(1j * phase) * self.w_small[None, :, None]).astype(dtype)
        return (F * self.c_large.astype(dtype)) @ F.conj().transpose(0, 2, 1)

    def eigenvalues(self, taus) -> np.ndarray:
        """Descending eigenvalues of the reduced Gram matrix, one row per tau."""
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        if self.method == "lapack":
            w = np.linalg.eigvalsh(self._gram_batch(taus))
            return w[:, ::-1]
        rows = []
        for t in taus:
            G = self._gram_batch([t], np.clongdouble)[0]
            w, _ = jacobi_eigh(G)
            rows.append(np.sort(np.asarray(w, dtype=float))[::-1])
        return np.array(rows)

    def ratios(self, taus, K: int) -> np.ndarray:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        if K > self.rank:
            return np.zeros(taus.shape)
        w = self.eigenvalues(taus)
        return w[:, K - 1] / w[:, 0]

    def emg(self, taus, gamma: float) -> np.ndarray:
        w = self.eigenvalues(taus)
        return np.count_nonzero(w / w[:, :1] >= gamma, axis=1)


def tau_min_search(layout_t, layout_r, K: int, gamma: float,
                   cfg: Optional[SearchConfig] = None) -> TauMinResult:
    """Smallest ``tau`` at which the EMG reaches ``K``.

    Scans the grid of ``cfg`` in increasing order and bisects the first
    crossing of ``mu_K / mu_1 >= gamma``.  Later dips of the ratio below
    ``gamma`` are ignored (first-crossing semantics).

    Raises
    ------
    NotAchievableError
        No grid point in ``(0, cfg.tau_max]`` reaches the threshold.
    """
    cfg = cfg or SearchConfig()
    check_gamma(gamma)
    M, N = len(np.atleast_1d(layout_r)), len(np.atleast_1d(layout_t))
    if not 1 <= K <= min(M, N):
        raise DomainError(f"K must lie in [1, min(M, N)] = [1, {min(M, N)}], got {K}")
    if K == 1:
        return TauMinResult(0.0, 1, gamma, (0.0, 0.0), 1.0)

    ev = RatioEvaluator(layout_r, layout_t, cfg.method)
    grid = cfg.grid()
    best = 0.0
    hit = None
    for start in range(0, grid.size, cfg.chunk):
        block = grid[start:start + cfg.chunk]
        r = ev.ratios(block, K)
        best = max(best, float(r.max()))
        idx = np.flatnonzero(r >= gamma)
        if idx.size:
            hit = start + int(idx[0])
            break
    if hit is None:
        raise NotAchievableError(K, gamma, (0.0, float(cfg.tau_max)), best)

    lo = float(grid[hit - 1]) if hit > 0 else 0.0
    hi = float(grid[hit])
    ratio_hi = float(ev.ratios([hi], K)[0])
    for _ in range(cfg.bisection_steps):
        if hi - lo <= cfg.tol:
            break
        mid = 0.5 * (lo + hi)
        r_mid = float(ev.ratios([mid], K)[0])
        if r_mid >= gamma:
            hi, ratio_hi = mid, r_mid
        else:
            lo = mid
    return TauMinResult(hi, K, gamma, (lo, hi), ratio_hi)


def _map_chunks(fn, grid, chunk, threads):
    pieces = [grid[i:i + chunk] for i in range(0, grid.size, chunk)]
    if threads and threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, pieces))
    return [fn(p) for p in pieces]


def ratio_sweep(layout_t, layout_r, K: int, tau_grid, method: str = "lapack",
                threads: int = 1) -> np.ndarray:
    """Rows ``(tau, mu_K / mu_1)`` for every grid point, in grid order."""
    grid = np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise DomainError("tau grid must be positive and strictly increasing")
    ev = RatioEvaluator(layout_r, layout_t, method)
    parts = _map_chunks(lambda g: ev.ratios(g, K), grid, 256, threads)
    ratios = np.concatenate(parts) if parts else np.zeros(0)
    return np.column_stack([grid, ratios])


def max_achievable_emg(layout_t, layout_r, gamma: float, tau_grid) -> int:
    """Largest EMG over a grid of ``tau`` values."""
    check_gamma(gamma)
    grid = np.atleast_1d(np.asarray(tau_grid, dtype=float))
    ev = RatioEvaluator(layout_r, layout_t)
    if ev.rank == 1:
        return 1
    return int(max(int(ev.emg(g, gamma).max()) for g in
                   (grid[i:i + 256] for i in range(0, grid.size, 256))))
