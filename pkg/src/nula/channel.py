"""
Line-of-sight channel matrices.

``build_hhat`` gives the unit-modulus matrix whose singular values carry all
the deployment-dependent information; ``build_full_channel`` adds the common
path gain and the two diagonal phase screens (or ray-traces every entry).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateArrayError
from .geometry import (RECEIVE, TRANSMIT, ArrayLayout, LinkGeometry,
                       _coordinate_array, compute_tau, distance_matrix)

HHAT = "hhat"
FULL_FARFIELD = "full-farfield"
FULL_EXACT = "full-exact"


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Complex ``M x N`` channel together with how it was built.

    ``phase_r`` and ``phase_t`` hold the diagonals of the receive and
    transmit phase matrices for the far-field kind.
    """

    entries: np.ndarray
    kind: str
    tau: Optional[float] = None
    phase_r: Optional[np.ndarray] = None
    phase_t: Optional[np.ndarray] = None

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def build_hhat(layout_r, layout_t, tau: float) -> ChannelMatrix:
    """Entry ``(m, n)`` is ``exp(j tau alpha_r[m] alpha_t[n])``."""
    ar = np.asarray(layout_r, dtype=float)
    at = np.asarray(layout_t, dtype=float)
    entries = np.exp(1j * float(tau) * np.outer(ar, at))
    return ChannelMatrix(entries, HHAT, float(tau))


def default_rho(M: int, N: int, geom: LinkGeometry) -> float:
    """Pattern constant that normalizes ``tr(H H^H)`` to 1.

    Every far-field entry then has modulus ``1 / sqrt(M N)``, i.e.
    ``|rho| lambda / (4 pi D) = 1 / sqrt(M N)``.
    """
    return 4.0 * math.pi * geom.distance / (geom.wavelength * math.sqrt(M * N))


def build_full_channel(geom: LinkGeometry, layout_t, layout_r, mode: str = "farfield",
                       rho: Optional[complex] = None) -> ChannelMatrix:
    """Complex baseband channel including path gain and phase screens.

    Parameters
    ----------
    geom : LinkGeometry
    layout_t, layout_r : ArrayLayout or array_like
        Transmit (``N``) and receive (``M``) normalized positions.
    mode : {"farfield", "exact"}
        ``"farfield"`` factors the channel into a scalar, two diagonal
        phase matrices and ``build_hhat``; ``"exact"`` evaluates every entry
        with its own distance, so amplitudes vary as ``1 / d``.
    rho : complex, optional
        Antenna-pattern constant.  Defaults to :func:`default_rho`.
    """
    ar = np.asarray(layout_r, dtype=float)
    at = np.asarray(layout_t, dtype=float)
    M, N = ar.size, at.size
    if rho is None:
        rho = default_rho(M, N, geom)
    lam, D = geom.wavelength, geom.distance
    k = 2.0 * math.pi / lam

    if mode == "exact":
        d = distance_matrix(ar, at, geom, "exact")
        entries = rho * lam / (4.0 * math.pi * d) * np.exp(-1j * k * d)
        return ChannelMatrix(entries, FULL_EXACT, compute_tau(geom))
    if mode != "farfield":
        raise ValueError(f"unknown channel mode {mode!r}")

    rx = _coordinate_array(ar, geom, RECEIVE)
    tx = _coordinate_array(at, geom, TRANSMIT)
    phase_r = np.exp(-1j * k * (rx[:, 2] + (rx[:, 0] ** 2 + rx[:, 1] ** 2) / (2 * D)))
    phase_t = np.exp(-1j * k * (-tx[:, 2] + (tx[:, 0] ** 2 + tx[:, 1] ** 2) / (2 * D)))
    tau = compute_tau(geom)
    hhat = build_hhat(ar, at, tau).entries
    scale = rho * lam / (4.0 * math.pi * D) * np.exp(-1j * k * D)
    entries = scale * (phase_r[:, None] * hhat * phase_t[None, :])
    return ChannelMatrix(entries, FULL_FARFIELD, tau, phase_r, phase_t)


def ula_layout(M: int) -> ArrayLayout:
    """Equally spaced positions from -1 to 1."""
    if M < 2:
        raise DegenerateArrayError("a ULA needs at least two antennas")
    m = np.arange(1, M + 1)
    return ArrayLayout((2 * m - M - 1) / (M - 1))


def ula_gram(M: int, N: int, tau: float) -> np.ndarray:
    """Closed-form Gram matrix ``Hhat Hhat^H`` of an ``M x N`` ULA pair.

    ``g[m, n] = sin(N x) / sin(x)`` with ``x = 2 tau (m - n) / ((M-1)(N-1))``.
    Where ``sin(x)`` vanishes (``x = j pi``) the limit ``N (-1)^(j (N-1))``
    is used; this covers the diagonal and the Rayleigh configuration.
    The formula holds for either ordering of ``M`` and ``N``.
    """
    if M < 2 or N < 2:
        raise DegenerateArrayError("ula_gram needs M >= 2 and N >= 2")
    diff = np.subtract.outer(np.arange(M), np.arange(M)).astype(float)
    x = 2.0 * tau * diff / ((M - 1) * (N - 1))
    turns = np.rint(x / math.pi)
    singular = np.abs(x - turns * math.pi) < 1e-9
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.sin(N * x) / np.sin(x)
    limit = N * np.where(np.mod(turns * (N - 1), 2) == 0, 1.0, -1.0)
    return np.where(singular, limit, g)
