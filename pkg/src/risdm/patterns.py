"""Static power patterns of a space-coded aperture and beam-steering checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .array import ArrayGeometry, Direction, feed_distances
from .coding import SpaceCoding, space_coding
from .errors import UsageError
from .synthesis import element_contributions

__all__ = [
    "DEFAULT_GRID_DEG",
    "PatternCut",
    "ScanResult",
    "array_sum",
    "power_pattern",
    "beamforming_gain",
    "beam_scan",
    "write_pattern_csv",
]

DEFAULT_GRID_DEG = np.round(np.arange(-900, 901) * 0.1, 1)


@dataclass(frozen=True)
class PatternCut:
    """Power over a signed-theta cut at fixed ``phi``, normalized to a 0 dB peak."""

    theta_deg: np.ndarray
    phi_deg: float
    values: np.ndarray

    @property
    def directions(self) -> List[Direction]:
        phi = math.radians(self.phi_deg)
        return [Direction.from_cut(math.radians(t), phi) for t in self.theta_deg]

    @property
    def peak_theta_deg(self) -> float:
        return float(self.theta_deg[int(np.argmax(self.values))])

    def value_at(self, theta_deg: float) -> float:
        return float(np.interp(theta_deg, self.theta_deg, self.values))


@dataclass(frozen=True)
class ScanResult:
    commanded_deg: float
    peak_deg: float
    gain_db: float


def _cut_uv(theta_deg, phi_deg):
    theta = np.radians(np.asarray(theta_deg, dtype=float))
    phi = math.radians(phi_deg)
    return np.sin(theta) * math.cos(phi), np.sin(theta) * math.sin(phi)


def array_sum(geom: ArrayGeometry, bits: np.ndarray, direction: Direction, path_loss: bool = True) -> complex:
    """Static field toward ``direction`` with element states ``bits``."""
    contrib = element_contributions(geom, direction, path_loss)
    return complex(np.sum(contrib * (1.0 - 2.0 * np.asarray(bits, dtype=float))))


def power_pattern(
    geom: ArrayGeometry,
    space: SpaceCoding,
    grid_deg: Optional[Sequence[float]] = None,
    phi_deg: float = 0.0,
) -> PatternCut:
    """``|sum exp(jKr)/r * exp(j*pi*Gamma) * w|**2`` along a signed-theta cut.

    The feed's ``1/r`` spreading is applied exactly as the pattern formula
    states. A feedless geometry uses unit illumination.
    """
    grid = DEFAULT_GRID_DEG if grid_deg is None else np.asarray(grid_deg, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise UsageError("pattern grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise UsageError("pattern grid must be strictly increasing")
    if np.any(np.abs(grid) > 90.0 + 1e-9):
        raise UsageError("pattern grid must stay within [-90, 90] degrees")
    if space.bits.shape != geom.shape:
        raise UsageError("space coding does not match the array shape")

    K = geom.wavenumber
    if geom.feed is None:
        illum = np.ones(geom.shape, dtype=complex)
    else:
        r = feed_distances(geom)
        illum = np.exp(1j * K * r) / r
    weights = (illum * (1.0 - 2.0 * space.bits)).reshape(-1)

    u, v = _cut_uv(grid, phi_deg)
    rows = geom.row_offsets().reshape(-1)
    cols = geom.col_offsets().reshape(-1)
    # separable steering: sum_m sum_n W[m,n] a_m(u) b_n(v)
    a = np.exp(-1j * K * np.outer(u, rows))
    b = np.exp(-1j * K * np.outer(v, cols))
    W = weights.reshape(geom.shape)
    field = np.einsum("gm,mn,gn->g", a, W, b)
    power = np.abs(field) ** 2
    peak = power.max()
    with np.errstate(divide="ignore"):
        values = 10.0 * np.log10(power / peak) if peak > 0 else np.full_like(power, -np.inf)
    return PatternCut(grid.copy(), float(phi_deg), values)


def beamforming_gain(geom: ArrayGeometry, direction: Direction, path_loss: bool = True) -> float:
    """Power gain in dB at ``direction`` of its own space coding over all-zero coding.

    Uses the same element field model as waveform synthesis, so this equals
    the squared magnitude of the joint/time-only waveform ratio.
    """
    bits = space_coding(geom, direction).bits
    steered = array_sum(geom, bits, direction, path_loss)
    flat = array_sum(geom, np.zeros(geom.shape), direction, path_loss)
    return 10.0 * math.log10(abs(steered) ** 2 / abs(flat) ** 2)


def beam_scan(
    geom: ArrayGeometry,
    targets_deg: Sequence[float],
    phi_deg: float = 0.0,
    grid_deg: Optional[Sequence[float]] = None,
) -> List[ScanResult]:
    """Steer to each signed target angle on the ``phi`` cut and locate the pattern peak."""
    out = []
    for target in targets_deg:
        if abs(target) > 60.0:
            raise UsageError(f"scan target {target} deg outside +-60 deg")
        direction = Direction.from_degrees(target, phi_deg)
        cut = power_pattern(geom, space_coding(geom, direction), grid_deg, phi_deg)
        out.append(ScanResult(float(target), cut.peak_theta_deg, beamforming_gain(geom, direction)))
    return out


def write_pattern_csv(path, cut: PatternCut) -> Path:
    path = Path(path)
    data = np.column_stack([cut.theta_deg, cut.values])
    np.savetxt(path, data, delimiter=",", header="theta_deg,power_db", comments="", fmt=["%.1f", "%.6f"])
    return path
