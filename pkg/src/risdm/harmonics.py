"""Harmonic content of periodic 1-bit phase switching.

An element toggled between phase 0 and phase pi with duty ratio ``mu`` and
on-start instant ``t_on`` has the unit-modulus response ``exp(j*pi*g(t))``.
Its Fourier series coefficients are available in closed form; inverting the
``k = +1`` coefficient gives the duty ratio and start instant that place a
wanted complex amplitude on the first upper sideband.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleAmplitudeError, UsageError

__all__ = [
    "MAX_FIRST_HARMONIC",
    "SlotCode",
    "harmonic_coefficient",
    "numeric_harmonic_oracle",
    "numeric_harmonic_spectrum",
    "solve_slot_for_target",
    "solve_slots_for_targets",
]

#: Largest +1st-harmonic magnitude, reached at ``mu = 0.5``.
MAX_FIRST_HARMONIC = 2.0 / math.pi

_AMPLITUDE_SLACK = 1e-12


@dataclass(frozen=True)
class SlotCode:
    """Switching parameters for one period ``T_p``.

    The element is ON on ``[t_on, t_on + mu*T_p)`` taken modulo ``T_p``.
    """

    mu: float
    t_on: float
    T_p: float

    def __post_init__(self):
        if not self.T_p > 0:
            raise UsageError(f"T_p must be > 0, got {self.T_p}")
        if not 0.0 <= self.mu <= 1.0:
            raise UsageError(f"duty ratio mu must lie in [0, 1], got {self.mu}")
        if not 0.0 <= self.t_on < self.T_p:
            raise UsageError(f"t_on must lie in [0, T_p), got {self.t_on}")

    @property
    def F_p(self) -> float:
        return 1.0 / self.T_p

    def is_on(self, t):
        """Evaluate the switching waveform ``g(t)`` (1 = ON) at times ``t``."""
        phase = np.mod((np.asarray(t, dtype=float) - self.t_on) / self.T_p, 1.0)
        return (phase < self.mu).astype(np.uint8)


def harmonic_coefficient(slot: SlotCode, k: int) -> complex:
    """Closed-form Fourier coefficient of ``exp(j*pi*g(t))`` at ``k * F_p``."""
    if k == 0:
        return complex(1.0 - 2.0 * slot.mu, 0.0)
    x = math.pi * k * slot.mu
    amp = -2.0 / (math.pi * k) * math.sin(x)
    phase = 2.0 * math.pi * k * slot.F_p * slot.t_on + x
    return complex(amp * math.cos(phase), -amp * math.sin(phase))


def numeric_harmonic_oracle(slot: SlotCode, k: int, samples_per_period: int = 100_000) -> complex:
    """DFT bin ``k`` of one sampled period of ``exp(j*pi*g(t))``.

    Samples sit at the midpoints of ``samples_per_period`` equal cells, so no
    sample lands on a switching instant that lies on the cell grid and the
    result converges to the Fourier coefficient as ``O(1/S**2)``.
    """
    return complex(numeric_harmonic_spectrum(slot, [k], samples_per_period)[0])


def numeric_harmonic_spectrum(slot: SlotCode, ks, samples_per_period: int = 100_000) -> np.ndarray:
    """:func:`numeric_harmonic_oracle` for several ``k`` from a single FFT."""
    if samples_per_period < 1000:
        raise UsageError("samples_per_period must be >= 1000")
    S = int(samples_per_period)
    ks = np.asarray(ks, dtype=np.int64)
    t = (np.arange(S) + 0.5) * (slot.T_p / S)
    h = np.exp(1j * np.pi * slot.is_on(t))
    # the DFT kernel assumes samples at cell starts; undo the half-cell delay
    return np.fft.fft(h)[ks % S] / S * np.exp(-1j * np.pi * ks / S)


def solve_slots_for_targets(targets, T_p: float):
    """Vectorized inverse of the ``k = +1`` coefficient.

    Returns ``(mu, t_on)`` arrays with ``mu`` in ``[0, 0.5]`` and ``t_on`` in
    ``[0, T_p)``. Zero targets give ``mu = 0, t_on = 0``.
    """
    targets = np.asarray(targets, dtype=complex)
    mag = np.abs(targets)
    if np.any(mag > MAX_FIRST_HARMONIC + _AMPLITUDE_SLACK):
        worst = float(mag.max())
        raise InfeasibleAmplitudeError(
            f"|target| = {worst:.6g} exceeds the +1st harmonic limit 2/pi = {MAX_FIRST_HARMONIC:.6g}"
        )
    mu = np.arcsin(np.minimum(mag / MAX_FIRST_HARMONIC, 1.0)) / np.pi
    # arg H1 = pi - (2*pi*t_on/T_p + pi*mu) while sin(pi*mu) > 0
    frac = np.mod((np.pi - np.angle(targets) - np.pi * mu) / (2.0 * np.pi), 1.0)
    t_on = np.where(mu == 0.0, 0.0, frac * T_p)
    t_on = np.where(t_on >= T_p, 0.0, t_on)
    return mu, t_on


def solve_slot_for_target(target: complex, T_p: float) -> SlotCode:
    """Duty ratio and on-start instant whose +1st harmonic equals ``target``."""
    mu, t_on = solve_slots_for_targets([target], T_p)
    return SlotCode(float(mu[0]), float(t_on[0]), T_p)
