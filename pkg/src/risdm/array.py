"""Geometry of the RIS aperture and its feed.

Element indices are 1-based ``(m, n)`` with ``m`` running over the ``M`` rows
and ``n`` over the ``N`` columns. The feed-distance formula places the column
offset on the x axis and the row offset on y, while the steering factor pairs
the row offset with ``sin(theta) cos(phi)``. Both are kept exactly as written
so the quantized space coding cancels the steering phase term for term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import UsageError

__all__ = [
    "SPEED_OF_LIGHT",
    "ArrayGeometry",
    "Direction",
    "direction_vector",
    "feed_distance",
    "feed_distances",
    "steering_factor",
    "steering_matrix",
    "element_weights",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """An ``M x N`` planar RIS in the xoy plane illuminated by a point feed.

    ``feed`` is ``(x_c, y_c, z_c)`` in metres. ``feed=None`` models plane-wave
    illumination: every element sees the same incident phase and amplitude.
    """

    M: int = 16
    N: int = 16
    d: float = 0.043
    f_c: float = 3.6e9
    feed: Optional[Tuple[float, float, float]] = (0.0, 0.0, -0.2)

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise UsageError(f"M must be a positive integer, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise UsageError(f"N must be a positive integer, got {self.N}")
        if not self.d > 0:
            raise UsageError(f"element spacing d must be > 0, got {self.d}")
        if not self.f_c > 0:
            raise UsageError(f"carrier frequency f_c must be > 0, got {self.f_c}")
        if self.feed is not None:
            feed = tuple(float(v) for v in self.feed)
            if len(feed) != 3:
                raise UsageError("feed must be a 3-vector (x_c, y_c, z_c)")
            object.__setattr__(self, "feed", feed)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.M, self.N)

    def row_offsets(self) -> np.ndarray:
        """``(m - (M+1)/2) * d`` for m = 1..M, as a column vector."""
        m = np.arange(1, self.M + 1, dtype=float)
        return ((m - (self.M + 1) / 2.0) * self.d)[:, None]

    def col_offsets(self) -> np.ndarray:
        """``(n - (N+1)/2) * d`` for n = 1..N, as a row vector."""
        n = np.arange(1, self.N + 1, dtype=float)
        return ((n - (self.N + 1) / 2.0) * self.d)[None, :]


@dataclass(frozen=True)
class Direction:
    """Far-field direction: polar angle ``theta`` and azimuth ``phi`` in radians."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi / 2 + 1e-12):
            raise UsageError(f"theta must lie in [0, pi/2], got {self.theta}")
        phi = math.fmod(self.phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float = 0.0) -> "Direction":
        return cls.from_cut(math.radians(theta_deg), math.radians(phi_deg))

    @classmethod
    def from_cut(cls, theta: float, phi: float = 0.0) -> "Direction":
        """Build a direction from a signed pattern-cut angle.

        Pattern cuts sweep theta through negative values; ``(-theta, phi)``
        is the same physical direction as ``(theta, phi + pi)``.
        """
        if theta < 0:
            return cls(-theta, phi + math.pi)
        return cls(theta, phi)

    @property
    def u(self) -> float:
        """``sin(theta) cos(phi)``"""
        return math.sin(self.theta) * math.cos(self.phi)

    @property
    def v(self) -> float:
        """``sin(theta) sin(phi)``"""
        return math.sin(self.theta) * math.sin(self.phi)

    @property
    def signed_theta_deg(self) -> float:
        """Theta in degrees, negative for the back half of a cut (phi in (pi/2, 3pi/2))."""
        t = math.degrees(self.theta)
        return -t if math.cos(self.phi) < 0 else t


def direction_vector(direction: Direction) -> np.ndarray:
    st = math.sin(direction.theta)
    return np.array(
        [st * math.cos(direction.phi), st * math.sin(direction.phi), math.cos(direction.theta)]
    )


def _check_index(geom: ArrayGeometry, m: int, n: int) -> None:
    if not (1 <= m <= geom.M and 1 <= n <= geom.N):
        raise UsageError(f"element index ({m}, {n}) outside 1..{geom.M} x 1..{geom.N}")


def feed_distance(geom: ArrayGeometry, m: int, n: int) -> float:
    """Distance in metres from the feed to element ``(m, n)`` (1-based)."""
    _check_index(geom, m, n)
    if geom.feed is None:
        raise UsageError("geometry has no feed (plane-wave illumination)")
    x_c, y_c, z_c = geom.feed
    dx = (n - (geom.N + 1) / 2.0) * geom.d - x_c
    dy = (m - (geom.M + 1) / 2.0) * geom.d - y_c
    return math.sqrt(dx * dx + dy * dy + z_c * z_c)


def feed_distances(geom: ArrayGeometry) -> np.ndarray:
    """``M x N`` matrix of feed distances; entry ``[m-1, n-1]`` is ``r_{m,n}``."""
    if geom.feed is None:
        raise UsageError("geometry has no feed (plane-wave illumination)")
    x_c, y_c, z_c = geom.feed
    dx = geom.col_offsets() - x_c
    dy = geom.row_offsets() - y_c
    return np.sqrt(dx**2 + dy**2 + z_c**2)


def steering_factor(geom: ArrayGeometry, m: int, n: int, direction: Direction) -> complex:
    _check_index(geom, m, n)
    kd = geom.wavenumber * geom.d
    phase = kd * (m - (geom.M + 1) / 2.0) * direction.u + kd * (n - (geom.N + 1) / 2.0) * direction.v
    return complex(np.exp(-1j * phase))


def steering_matrix(geom: ArrayGeometry, direction: Direction) -> np.ndarray:
    """All ``w_{m,n}`` for one direction as an ``M x N`` complex array."""
    K = geom.wavenumber
    phase = K * geom.row_offsets() * direction.u + K * geom.col_offsets() * direction.v
    return np.exp(-1j * phase)


def element_weights(geom: ArrayGeometry, path_loss: bool = True) -> np.ndarray:
    """Complex illumination of each element, ``a_{m,n} exp(j K r_{m,n})``.

    With ``path_loss`` the amplitude follows ``1/r`` scaled by the shortest
    feed distance, so the element nearest the feed has unit amplitude.
    Without it every element has unit amplitude. A geometry without a feed
    returns all ones.
    """
    if geom.feed is None:
        return np.ones(geom.shape, dtype=complex)
    r = feed_distances(geom)
    if r.min() == 0.0:
        raise UsageError("feed coincides with an element; 1/r amplitude undefined")
    field_ = np.exp(1j * geom.wavenumber * r)
    if path_loss:
        field_ = field_ * (r.min() / r)
    return field_
