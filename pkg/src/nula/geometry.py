"""
Link geometry for a pair of linear arrays facing each other.

The transmit array is centred at the origin and lies in the x-z plane; the
receive array is centred at ``(0, 0, D)`` with arbitrary orientation.  Antenna
positions along either array are normalized to ``alpha in [-1, 1]`` so that
``alpha = +-1`` are the array ends.  All lengths are metres, all angles
radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateArrayError, DomainError, InvalidGeometryError

TRANSMIT = "transmit"
RECEIVE = "receive"


@dataclass(frozen=True)
class LinkGeometry:
    """Physical description of the link.

    Parameters
    ----------
    wavelength : float
        Carrier wavelength in metres.
    distance : float
        Centre-to-centre distance ``D`` between the arrays.
    aperture_t, aperture_r : float
        Transmit and receive aperture lengths ``L_t`` and ``L_r``.
    theta_t : float
        Angle between the transmit array and the x-axis.
    theta_r : float
        Angle between the receive array and the x-axis.
    phi_r : float
        Angle between the receive array's projection on the y-z plane and
        the z-axis.
    """

    wavelength: float
    distance: float
    aperture_t: float
    aperture_r: float
    theta_t: float = 0.0
    theta_r: float = 0.0
    phi_r: float = 0.0

    def __post_init__(self):
        for name in ("wavelength", "distance", "aperture_t", "aperture_r",
                     "theta_t", "theta_r", "phi_r"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidGeometryError(f"{name} must be finite, got {value!r}")
        if self.wavelength <= 0:
            raise InvalidGeometryError("wavelength must be positive")
        if self.distance <= 0:
            raise InvalidGeometryError("distance must be positive")
        if self.aperture_t < 0 or self.aperture_r < 0:
            raise InvalidGeometryError("apertures must be non-negative")

    def is_far_field(self, ratio: float = 10.0) -> bool:
        """True when ``D / max(L_t, L_r) >= ratio``."""
        largest = max(self.aperture_t, self.aperture_r)
        if largest == 0:
            return True
        return self.distance / largest >= ratio

    def with_distance(self, distance: float) -> "LinkGeometry":
        return LinkGeometry(self.wavelength, distance, self.aperture_t,
                            self.aperture_r, self.theta_t, self.theta_r, self.phi_r)


@dataclass(frozen=True)
class ArrayLayout:
    """Sorted normalized antenna positions of one array."""

    alphas: tuple

    def __init__(self, alphas: Sequence[float]):
        values = np.asarray(alphas, dtype=float).ravel()
        if values.size == 0:
            raise InvalidGeometryError("a layout needs at least one antenna")
        if not np.all(np.isfinite(values)):
            raise InvalidGeometryError("positions must be finite")
        if np.any(np.abs(values) > 1.0):
            raise InvalidGeometryError("normalized positions must lie in [-1, 1]")
        if np.any(np.diff(values) < 0):
            raise InvalidGeometryError("positions must be non-decreasing")
        object.__setattr__(self, "alphas", tuple(float(v) for v in values))

    def __len__(self):
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.alphas, dtype=dtype if dtype is not None else float)

    @property
    def n_distinct(self) -> int:
        return len(set(self.alphas))


class Point3(NamedTuple):
    x: float
    y: float
    z: float


def compute_tau(geom: LinkGeometry) -> float:
    """Signed dimensionless aperture product ``tau``.

    ``pi L_r L_t cos(theta_r) cos(theta_t) / (2 lambda D)``.  The sign is kept;
    spectra only depend on ``abs(tau)``.
    """
    return (math.pi * geom.aperture_r * geom.aperture_t
            * math.cos(geom.theta_r) * math.cos(geom.theta_t)
            / (2.0 * geom.wavelength * geom.distance))


def rayleigh_distance(M: int, N: int, geom: LinkGeometry) -> float:
    """Distance at which broadside ULAs give an orthogonal channel.

    Uses the general form ``max(M, N) L_r L_t / (lambda (M-1)(N-1))``.
    """
    if M < 2 or N < 2:
        raise DegenerateArrayError("the Rayleigh distance needs M >= 2 and N >= 2")
    return (max(M, N) * geom.aperture_r * geom.aperture_t
            / (geom.wavelength * (M - 1) * (N - 1)))


def _orientation_factor(geom, broadside):
    if broadside:
        return 1.0
    factor = math.cos(geom.theta_r) * math.cos(geom.theta_t)
    if abs(factor) < 1e-15:
        raise DomainError("an array is perpendicular to the x-axis; tau is identically 0")
    return factor


def tau_to_distance(tau: float, geom: LinkGeometry, broadside: bool = True) -> float:
    """Distance ``D`` at which the link reaches the given ``tau``.

    The geometry's own distance is ignored.  With ``broadside=False`` the
    array orientation angles are taken into account.
    """
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    factor = _orientation_factor(geom, broadside)
    return (math.pi * geom.aperture_t * geom.aperture_r * factor
            / (2.0 * geom.wavelength * tau))


def distance_to_tau(distance: float, geom: LinkGeometry, broadside: bool = True) -> float:
    """Inverse of :func:`tau_to_distance`."""
    if not distance > 0:
        raise DomainError(f"distance must be positive, got {distance!r}")
    factor = _orientation_factor(geom, broadside)
    return (math.pi * geom.aperture_t * geom.aperture_r * factor
            / (2.0 * geom.wavelength * distance))


def _coordinate_array(alphas, geom, side):
    a = np.asarray(alphas, dtype=float)
    if side == TRANSMIT:
        half = geom.aperture_t * a / 2.0
        return np.stack([half * math.cos(geom.theta_t),
                         np.zeros_like(a),
                         half * math.sin(geom.theta_t)], axis=-1)
    if side == RECEIVE:
        half = geom.aperture_r * a / 2.0
        return np.stack([half * math.cos(geom.theta_r),
                         half * math.sin(geom.theta_r) * math.sin(geom.phi_r),
                         half * math.sin(geom.theta_r) * math.cos(geom.phi_r)], axis=-1)
    raise ValueError(f"side must be {TRANSMIT!r} or {RECEIVE!r}, got {side!r}")


def antenna_coordinates(layout, geom: LinkGeometry, side: str,
                        absolute: bool = False) -> list[Point3]:
    """Cartesian antenna positions.

    Receive coordinates are relative to the receive array centre unless
    ``absolute`` is set, in which case ``(0, 0, D)`` is added.
    """
    xyz = _coordinate_array(layout, geom, side)
    if absolute and side == RECEIVE:
        xyz = xyz + np.array([0.0, 0.0, geom.distance])
    return [Point3(*map(float, row)) for row in xyz]


def distance_matrix(layout_r, layout_t, geom: LinkGeometry,
                    mode: str = "exact") -> np.ndarray:
    """``M x N`` matrix of receive-transmit antenna distances.

    ``mode="exact"`` is the Euclidean norm; ``mode="farfield"`` is the
    second-order expansion used to derive the far-field channel.
    """
    rx = _coordinate_array(layout_r, geom, RECEIVE)
    tx = _coordinate_array(layout_t, geom, TRANSMIT)
    D = geom.distance
    if mode == "exact":
        diff = rx[:, None, :] - tx[None, :, :]
        diff[..., 2] += D
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if mode == "farfield":
        ar = np.asarray(layout_r, dtype=float)
        at = np.asarray(layout_t, dtype=float)
        rx_term = rx[:, 2] + (rx[:, 0] ** 2 + rx[:, 1] ** 2) / (2 * D)
        tx_term = -tx[:, 2] + (tx[:, 0] ** 2 + tx[:, 1] ** 2) / (2 * D)
        cross = (geom.aperture_r * geom.aperture_t * math.cos(geom.theta_r)
                 * math.cos(geom.theta_t) / (4 * D))
        return D + rx_term[:, None] + tx_term[None, :] - cross * np.outer(ar, at)
    raise ValueError(f"unknown distance mode {mode!r}")


def exact_distance(m: int, n: int, layout_r, layout_t, geom: LinkGeometry) -> float:
    """Euclidean distance from transmit antenna ``n`` to receive antenna ``m`` (0-based)."""
    ar = np.asarray(layout_r, dtype=float)[m:m + 1]
    at = np.asarray(layout_t, dtype=float)[n:n + 1]
    return float(distance_matrix(ar, at, geom, "exact")[0, 0])


def far_field_distance(m: int, n: int, layout_r, layout_t, geom: LinkGeometry) -> float:
    """Second-order far-field approximation of :func:`exact_distance`."""
    ar = np.asarray(layout_r, dtype=float)[m:m + 1]
    at = np.asarray(layout_t, dtype=float)[n:n + 1]
    return float(distance_matrix(ar, at, geom, "farfield")[0, 0])
