"""Bits to symbols, symbols to switching slots, and the XOR joint schedule.

The pipeline mirrors a transmitter controller: a bit parser feeding a QAM
mapper, a time-coding generator turning each symbol into one switching
period, a per-direction space-coding table, and the element-wise XOR that
produces the control bit of every element on every control-clock tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from .array import ArrayGeometry, Direction, feed_distances
from .errors import FramingError, InfeasibleAmplitudeError, UsageError
from .harmonics import MAX_FIRST_HARMONIC, SlotCode, solve_slots_for_targets

__all__ = [
    "QAM_ORDERS",
    "bits_per_symbol",
    "qam_constellation",
    "qam_map",
    "qam_demap",
    "TimeCode",
    "symbols_to_timecode",
    "SpaceCoding",
    "space_coding",
    "JointSchedule",
    "joint_code",
]

QAM_ORDERS = (4, 16, 64)


def bits_per_symbol(order: int) -> int:
    if order not in QAM_ORDERS:
        raise UsageError(f"QAM order must be one of {QAM_ORDERS}, got {order}")
    return int(math.log2(order))


def _axis_tables(order: int):
    levels = int(math.isqrt(order))
    index = np.arange(levels)
    gray = index ^ (index >> 1)
    index_of_gray = np.empty(levels, dtype=np.int64)
    index_of_gray[gray] = index
    # level index 0 is the most positive amplitude
    amplitude = (levels - 1 - 2 * index) / (levels - 1)
    return levels, gray, index_of_gray, amplitude


def _bits_to_ints(bits: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return bits @ weights


def _ints_to_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def qam_constellation(order: int) -> np.ndarray:
    """All ``order`` points, indexed by the integer value of their bit label."""
    k = bits_per_symbol(order)
    labels = _ints_to_bits(np.arange(order), k)
    return qam_map(labels.reshape(-1), order)


def qam_map(bits, order: int) -> np.ndarray:
    """Gray-coded square QAM with corner points on the unit circle.

    Each symbol takes ``log2(order)`` bits MSB first; the first half select
    the in-phase level and the second half the quadrature level.
    """
    k = bits_per_symbol(order)
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    if bits.size % k:
        raise FramingError(f"{bits.size} bits do not divide into {k}-bit symbols")
    if bits.size and (bits.min() < 0 or bits.max() > 1):
        raise UsageError("bits must be 0 or 1")
    half = k // 2
    _, _, index_of_gray, amplitude = _axis_tables(order)
    groups = bits.reshape(-1, k)
    i_level = amplitude[index_of_gray[_bits_to_ints(groups[:, :half])]]
    q_level = amplitude[index_of_gray[_bits_to_ints(groups[:, half:])]]
    return (i_level + 1j * q_level) / math.sqrt(2.0)


def qam_demap(symbols, order: int) -> np.ndarray:
    """Nearest-point hard decisions back to bits.

    On a square lattice the minimum-distance decision separates into two
    independent per-axis slicers, which is what is computed here.
    """
    k = bits_per_symbol(order)
    half = k // 2
    levels, gray, _, _ = _axis_tables(order)
    s = np.asarray(symbols, dtype=complex).reshape(-1) * math.sqrt(2.0)

    def slice_axis(x):
        idx = np.rint((levels - 1) * (1.0 - x) / 2.0)
        idx = np.clip(np.nan_to_num(idx, nan=0.0), 0, levels - 1).astype(np.int64)
        return _ints_to_bits(gray[idx], half)

    out = np.concatenate([slice_axis(s.real), slice_axis(s.imag)], axis=1)
    return out.reshape(-1)


@dataclass(frozen=True)
class TimeCode:
    """One switching slot per symbol, already snapped to the control clock.

    ``start_ticks[l]`` and ``on_ticks[l]`` give slot ``l``'s ON window in
    whole ticks of ``T_p / control_clock``. ``repeat`` periods are spent on
    each symbol.
    """

    start_ticks: np.ndarray
    on_ticks: np.ndarray
    T_p: float
    control_clock: int = 200
    repeat: int = 1

    def __post_init__(self):
        if self.control_clock < 2:
            raise UsageError("control_clock must be >= 2 ticks per period")
        if self.repeat < 1:
            raise UsageError("repeat must be >= 1")
        start = np.asarray(self.start_ticks, dtype=np.int64).reshape(-1)
        on = np.asarray(self.on_ticks, dtype=np.int64).reshape(-1)
        if start.shape != on.shape:
            raise UsageError("start_ticks and on_ticks differ in length")
        if np.any((start < 0) | (start >= self.control_clock)):
            raise UsageError("start tick outside [0, control_clock)")
        if np.any((on < 0) | (on > self.control_clock)):
            raise UsageError("ON duration outside [0, control_clock] ticks")
        object.__setattr__(self, "start_ticks", start)
        object.__setattr__(self, "on_ticks", on)

    def __len__(self):
        return self.start_ticks.size

    @property
    def tick_duration(self) -> float:
        return self.T_p / self.control_clock

    @property
    def ticks_per_symbol(self) -> int:
        return self.control_clock * self.repeat

    @property
    def slots(self) -> Tuple[SlotCode, ...]:
        C = self.control_clock
        return tuple(
            SlotCode(on / C, start * self.T_p / C, self.T_p)
            for start, on in zip(self.start_ticks.tolist(), self.on_ticks.tolist())
        )

    def raster(self) -> np.ndarray:
        """``G`` on every tick: a flat ``uint8`` array of ``len(self) * ticks_per_symbol``."""
        C = self.control_clock
        tick = np.arange(C)
        period = (np.mod(tick[None, :] - self.start_ticks[:, None], C) < self.on_ticks[:, None])
        period = period.astype(np.uint8)
        if self.repeat > 1:
            period = np.tile(period, (1, self.repeat))
        return period.reshape(-1)

    def concat(self, other: "TimeCode") -> "TimeCode":
        if (other.T_p, other.control_clock, other.repeat) != (self.T_p, self.control_clock, self.repeat):
            raise UsageError("cannot join time codes with different timing")
        return TimeCode(
            np.concatenate([self.start_ticks, other.start_ticks]),
            np.concatenate([self.on_ticks, other.on_ticks]),
            self.T_p,
            self.control_clock,
            self.repeat,
        )


def symbols_to_timecode(symbols, T_p: float, control_clock: int = 200, repeat: int = 1) -> TimeCode:
    """Map unit-peak symbols onto switching slots.

    A symbol ``s`` asks for the +1st harmonic ``s * 2/pi``; the exact slot is
    then rounded to the nearest control-clock tick.
    """
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    if symbols.size and np.abs(symbols).max() > 1.0 + 1e-12:
        raise InfeasibleAmplitudeError("symbol magnitude exceeds 1 (unit-peak constellation expected)")
    mu, t_on = solve_slots_for_targets(symbols * MAX_FIRST_HARMONIC, T_p)
    on = np.rint(mu * control_clock).astype(np.int64)
    start = np.mod(np.rint(t_on / T_p * control_clock).astype(np.int64), control_clock)
    start = np.where(on == 0, 0, start)
    return TimeCode(start, on, T_p, control_clock, repeat)


@dataclass(frozen=True)
class SpaceCoding:
    bits: np.ndarray
    design_direction: Optional[Direction] = None

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise UsageError("space coding must be an M x N matrix")
        if bits.size and not np.isin(bits, (0, 1)).all():
            raise UsageError("space coding entries must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(np.uint8))

    @classmethod
    def zeros(cls, geom: ArrayGeometry) -> "SpaceCoding":
        return cls(np.zeros(geom.shape, dtype=np.uint8))

    def inverted(self) -> "SpaceCoding":
        return SpaceCoding(1 - self.bits, self.design_direction)


def space_coding(geom: ArrayGeometry, direction: Direction) -> SpaceCoding:
    """1-bit quantized phase that points the aperture at ``direction``.

    The continuous phase adds the steering term and subtracts the feed path
    ``K r``; values in ``[0, pi)`` modulo ``2 pi`` map to 0, the rest to 1.
    """
    K = geom.wavenumber
    phase = K * geom.row_offsets() * direction.u + K * geom.col_offsets() * direction.v
    if geom.feed is not None:
        phase = phase - K * feed_distances(geom)
    wrapped = np.mod(phase, 2.0 * np.pi)
    return SpaceCoding((wrapped >= np.pi).astype(np.uint8), direction)


@dataclass(frozen=True)
class JointSchedule:
    """Per-tick control bits ``phi = Gamma XOR G`` for every element.

    The schedule is stored factored as the space bits and the time raster;
    ``frames`` and ``frame_chunks`` expand it tick by tick.
    """

    space_bits: np.ndarray
    time_bits: np.ndarray
    tick_duration: float
    control_clock: int
    design_direction: Optional[Direction] = None

    @property
    def n_ticks(self) -> int:
        return int(self.time_bits.size)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.space_bits.shape

    @property
    def T_p(self) -> float:
        return self.tick_duration * self.control_clock

    def frame(self, tick: int) -> np.ndarray:
        return self.space_bits ^ self.time_bits[tick]

    def frame_chunks(self, size: int = 65536) -> Iterator[Tuple[int, np.ndarray]]:
        """Yield ``(first_tick, frames)`` blocks of shape ``(n, M, N)``."""
        for first in range(0, self.n_ticks, size):
            g = self.time_bits[first:first + size]
            yield first, np.bitwise_xor(self.space_bits[None, :, :], g[:, None, None])

    @property
    def frames(self) -> np.ndarray:
        """The full ``(n_ticks, M, N)`` bit array. Memory grows with ``n_ticks * M * N``."""
        return np.bitwise_xor(self.space_bits[None, :, :], self.time_bits[:, None, None])


def joint_code(space: SpaceCoding, time: TimeCode) -> JointSchedule:
    return JointSchedule(
        space_bits=space.bits,
        time_bits=time.raster(),
        tick_duration=time.tick_duration,
        control_clock=time.control_clock,
        design_direction=space.design_direction,
    )
