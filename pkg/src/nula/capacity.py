"""
Capacity of the eigenmode channel.

Spectra are normalized to unit sum (total channel power 1), so ``snr`` is
the received signal-to-noise ratio.  Capacities are in bit/s/Hz.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .eig import Spectrum
from .errors import DomainError

WATERFILLING = "waterfilling"


def equal_power_tag(K: int) -> str:
    return f"equal_power({K})"


@dataclass(frozen=True, eq=False)
class CapacityPoint:
    """Capacity at one SNR.

    ``powers`` is the per-mode allocation (descending eigenvalue order) and
    ``water_level`` the common value of ``p_k + 1/mu_k`` over active modes
    (``None`` for equal power).
    """

    snr: float
    bits_per_s_per_hz: float
    scheme: str
    powers: np.ndarray
    water_level: Optional[float] = None


def _values(spec) -> np.ndarray:
    v = np.asarray(getattr(spec, "values", spec), dtype=float).ravel()
    if v.size == 0:
        raise DomainError("empty spectrum")
    if np.any(~np.isfinite(v)):
        raise DomainError("spectrum must be finite")
    return np.sort(np.maximum(v, 0.0))[::-1]


def _check_snr(snr):
    if not (math.isfinite(snr) and snr > 0):
        raise DomainError(f"snr must be positive and finite, got {snr!r}")


def normalize_spectrum(spec) -> Spectrum:
    """Scale eigenvalues so they sum to one (negative round-off is clipped)."""
    v = _values(spec)
    total = math.fsum(v)
    if total <= 0:
        raise DomainError("cannot normalize an all-zero spectrum")
    return Spectrum(v / total)


def capacity_equal_power(spec, snr: float, K: int) -> CapacityPoint:
    """``sum_{k<=K} log2(1 + snr/K * mu_k)`` over the ``K`` strongest modes."""
    _check_snr(snr)
    v = _values(spec)
    rank = int(np.count_nonzero(v > 0))
    if not 1 <= K <= rank:
        raise DomainError(f"K={K} must lie in [1, {rank}] (positive eigenvalues)")
    p = np.zeros(v.size)
    p[:K] = snr / K
    bits = math.fsum(np.log2(1.0 + p[:K] * v[:K]))
    return CapacityPoint(float(snr), bits, equal_power_tag(K), p)


def capacity_waterfilling(spec, snr: float) -> CapacityPoint:
    """Optimal power allocation over all modes.

    Starts with every positive mode active, computes the water level
    ``nu = (snr + sum 1/mu_k) / n`` and drops the weakest mode while its
    power ``nu - 1/mu_k`` is negative.
    """
    _check_snr(snr)
    v = _values(spec)
    # modes whose reciprocal overflows can never be activated
    n = int(np.count_nonzero(v > 1.0 / np.finfo(float).max))
    if n == 0:
        raise DomainError("spectrum has no eigenvalue above the underflow threshold")
    inv = 1.0 / v[:n]
    while True:
        level = (snr + math.fsum(inv[:n])) / n
        if level - inv[n - 1] >= 0 or n == 1:
            break
        n -= 1
    p = np.zeros(v.size)
    p[:n] = np.maximum(level - inv[:n], 0.0)
    # level - 1/mu cancels badly for tiny mu; restore the power budget exactly
    total = math.fsum(p[:n])
    if total > 0:
        p[:n] *= snr / total
    else:
        p[0] = snr
    bits = math.fsum(np.log2(1.0 + p[:n] * v[:n]))
    return CapacityPoint(float(snr), bits, WATERFILLING, p, level)


def kkt_residual(spec, point: CapacityPoint) -> float:
    """Largest violation of the waterfilling optimality conditions.

    Covers the power budget (relative), the common water level of active
    modes and ``1/mu_k >= level`` for inactive modes.
    """
    v = _values(spec)
    p = point.powers
    level = point.water_level
    active = p > 0
    res = abs(math.fsum(p) - point.snr) / point.snr
    if np.any(active):
        res = max(res, float(np.max(np.abs(p[active] + 1.0 / v[active] - level))) / level)
    idle = ~active
    if np.any(idle):
        with np.errstate(divide="ignore"):
            slack = 1.0 / v[idle] - level
        res = max(res, float(np.max(np.maximum(-slack, 0.0))) / level)
    res = max(res, float(np.max(np.maximum(-p, 0.0))))
    return res


def capacity_sweep(spectra: dict, snr_db_grid, schemes, threads: int = 1) -> list:
    """Capacity table over named spectra, SNR values (dB) and schemes.

    Parameters
    ----------
    spectra : dict
        Name to spectrum; normalized before use.
    snr_db_grid : array_like
    schemes : iterable
        ``"waterfilling"`` or an integer ``K`` for equal power over ``K``
        modes.

    Returns
    -------
    list of tuple
        ``(name, snr_db, scheme_tag, bits)`` ordered by name (insertion
        order), then SNR, then scheme.
    """
    grid = [float(s) for s in np.atleast_1d(np.asarray(snr_db_grid, dtype=float))]
    schemes = list(schemes)
    normalized = {name: normalize_spectrum(s) for name, s in spectra.items()}

    def evaluate(job):
        name, snr_db, sch = job
        spec = normalized[name]
        snr = 10.0 ** (snr_db / 10.0)
        if sch == WATERFILLING:
            pt = capacity_waterfilling(spec, snr)
        else:
            pt = capacity_equal_power(spec, snr, int(sch))
        return (name, snr_db, pt.scheme, pt.bits_per_s_per_hz)

    jobs = [(name, snr_db, sch) for name in normalized for snr_db in grid for sch in schemes]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(evaluate, jobs))
    return [evaluate(j) for j in jobs]
