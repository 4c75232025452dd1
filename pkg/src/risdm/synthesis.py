"""Far-field received waveform and AWGN channel.

Waveforms are complex baseband: the incident carrier is removed and the
carrier frequency enters only through the wavenumber. Every element adds its
illumination, its steering phase toward the receiver and its instantaneous
1-bit state ``(-1)**phi``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy import signal as sps

from .array import ArrayGeometry, Direction, element_weights, steering_matrix
from .coding import JointSchedule, SpaceCoding, TimeCode, joint_code
from .errors import ConfigurationError, UsageError

__all__ = [
    "IqWaveform",
    "ChannelConfig",
    "element_contributions",
    "synthesize_rx",
    "add_awgn",
    "reference_power",
    "power_spectrum",
    "write_waveform_csv",
    "write_spectrum_csv",
]


@dataclass(frozen=True)
class IqWaveform:
    samples: np.ndarray
    sample_rate: float
    t0: float = 0.0

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise UsageError(f"sample_rate must be > 0, got {self.sample_rate}")
        samples = np.asarray(self.samples, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(samples)):
            raise UsageError("waveform contains non-finite samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) / self.sample_rate

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def scaled(self, a: complex) -> "IqWaveform":
        return IqWaveform(self.samples * a, self.sample_rate, self.t0)

    def prepend(self, samples) -> "IqWaveform":
        lead = np.asarray(samples, dtype=complex).reshape(-1)
        return IqWaveform(
            np.concatenate([lead, self.samples]), self.sample_rate, self.t0 - lead.size / self.sample_rate
        )


@dataclass(frozen=True)
class ChannelConfig:
    snr_db: float
    reference_power: float
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.reference_power > 0:
            raise UsageError("reference_power must be > 0")

    @property
    def noise_variance(self) -> float:
        return self.reference_power / 10.0 ** (self.snr_db / 10.0)


def element_contributions(geom: ArrayGeometry, direction: Direction, path_loss: bool = True) -> np.ndarray:
    """Field each element sends toward ``direction`` in state 0, as ``M x N``."""
    return element_weights(geom, path_loss) * steering_matrix(geom, direction)


def _samples_per_tick(schedule: JointSchedule, sample_rate: float) -> int:
    ratio = sample_rate * schedule.tick_duration
    spt = int(round(ratio))
    if spt < 1 or abs(ratio - spt) > 1e-9 * max(1.0, ratio):
        raise ConfigurationError(
            f"sample rate {sample_rate:g} Hz is not an integer multiple of the control clock "
            f"{1.0 / schedule.tick_duration:g} Hz",
            key="sample_rate",
        )
    return spt


def synthesize_rx(
    geom: ArrayGeometry,
    schedule: JointSchedule,
    direction: Direction,
    sample_rate: Optional[float] = None,
    path_loss: bool = True,
    chunk: int = 32768,
) -> IqWaveform:
    """Received field at ``direction`` for every sample of ``schedule``.

    The raw element sum is returned with no ``1/(MN)`` scaling. Each tick is
    held for ``sample_rate * tick_duration`` samples; ``sample_rate``
    defaults to one sample per tick.
    """
    if schedule.shape != geom.shape:
        raise UsageError(f"schedule is {schedule.shape}, geometry is {geom.shape}")
    if sample_rate is None:
        sample_rate = 1.0 / schedule.tick_duration
    spt = _samples_per_tick(schedule, sample_rate)

    contrib = element_contributions(geom, direction, path_loss).reshape(-1)
    total = contrib.sum()
    re, im = contrib.real, contrib.imag
    out = np.empty(schedule.n_ticks, dtype=complex)
    for first, frames in schedule.frame_chunks(chunk):
        flat = frames.reshape(frames.shape[0], -1).astype(np.float64)
        # sum(c * (-1)**phi) = sum(c) - 2 * sum(c * phi)
        out[first:first + flat.shape[0]] = total - 2.0 * (flat @ re + 1j * (flat @ im))
    if spt > 1:
        out = np.repeat(out, spt)
    return IqWaveform(out, sample_rate)


def add_awgn(w: IqWaveform, cfg: ChannelConfig, rng: Optional[np.random.Generator] = None) -> IqWaveform:
    """Add circular complex Gaussian noise of variance ``reference_power / snr``.

    Noise is drawn from ``rng`` when given, otherwise from a fresh PCG64
    generator seeded with ``cfg.seed``. ``snr_db = inf`` returns the input.
    """
    if math.isinf(cfg.snr_db) and cfg.snr_db > 0:
        return IqWaveform(w.samples.copy(), w.sample_rate, w.t0)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    sigma = math.sqrt(cfg.noise_variance / 2.0)
    noise = rng.standard_normal((2, w.samples.size))
    return IqWaveform(w.samples + sigma * (noise[0] + 1j * noise[1]), w.sample_rate, w.t0)


def reference_power(
    geom: ArrayGeometry,
    direction: Direction,
    timecode: TimeCode,
    path_loss: bool = True,
    sample_rate: Optional[float] = None,
) -> float:
    """Mean received power at ``direction`` with every element switched together."""
    schedule = joint_code(SpaceCoding.zeros(geom), timecode)
    return synthesize_rx(geom, schedule, direction, sample_rate, path_loss).mean_power()


def power_spectrum(w: IqWaveform, nfft: int = 4096) -> Tuple[np.ndarray, np.ndarray]:
    """Welch estimate (Hann, 50 % overlap), two-sided, in dB relative to its peak.

    Frequencies are offsets from the carrier, ascending, spaced
    ``sample_rate / nfft``.
    """
    if nfft < 2 or nfft > w.samples.size:
        raise UsageError(f"need at least nfft={nfft} samples, have {w.samples.size}")
    f, pxx = sps.welch(
        w.samples,
        fs=w.sample_rate,
        window="hann",
        nperseg=nfft,
        noverlap=nfft // 2,
        return_onesided=False,
        detrend=False,
        scaling="density",
    )
    f = np.fft.fftshift(f)
    pxx = np.fft.fftshift(pxx)
    peak = pxx.max()
    if peak <= 0:
        return f, np.full_like(pxx, -np.inf)
    with np.errstate(divide="ignore"):
        return f, 10.0 * np.log10(pxx / peak)


def write_waveform_csv(path, w: IqWaveform) -> Path:
    path = Path(path)
    data = np.column_stack([w.times, w.samples.real, w.samples.imag])
    np.savetxt(path, data, delimiter=",", header="t_s,I,Q", comments="", fmt="%.12g")
    return path


def write_spectrum_csv(path, freqs: np.ndarray, power_db: np.ndarray) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f_offset_hz", "power_db"])
        for f, p in zip(freqs.tolist(), power_db.tolist()):
            writer.writerow([f"{f:.6f}", f"{p:.6f}"])
    return path
