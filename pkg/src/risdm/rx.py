"""Receiver: frame sync on the received phase, per-symbol harmonic demodulation,
pilot-based scalar equalization, and EVM/BER scoring.

A frame is a 13-chip Barker sync segment sent as full-amplitude BPSK symbols
followed by the payload symbols. The sync segment doubles as the pilot block
for the channel gain estimate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import signal as sps

from .coding import bits_per_symbol, qam_demap, symbols_to_timecode
from .errors import ConfigurationError, EqualizationError, SyncError, UsageError
from .synthesis import IqWaveform

__all__ = [
    "BARKER13",
    "FrameFormat",
    "DemodReport",
    "barker_autocorrelation",
    "extract_phase",
    "sync_template",
    "sync_correlation",
    "barker_sync",
    "demod_symbols",
    "estimate_gain",
    "equalize",
    "metrics",
    "write_constellation_csv",
]

BARKER13 = np.array([1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1], dtype=np.int8)


@dataclass(frozen=True)
class FrameFormat:
    payload_symbols: int
    pilot_symbols: int = 13
    sync: tuple = tuple(BARKER13.tolist())

    def __post_init__(self):
        if len(self.sync) != 13:
            raise UsageError("sync sequence must have 13 chips")
        if self.payload_symbols < 0:
            raise UsageError("payload_symbols must be >= 0")
        if not 1 <= self.pilot_symbols <= len(self.sync):
            raise UsageError("pilot_symbols must lie in 1..13 (pilots are taken from the sync segment)")

    @property
    def sync_symbols(self) -> np.ndarray:
        return np.asarray(self.sync, dtype=complex)

    @property
    def pilots(self) -> np.ndarray:
        return self.sync_symbols[: self.pilot_symbols]

    @property
    def total_symbols(self) -> int:
        return len(self.sync) + self.payload_symbols


@dataclass
class DemodReport:
    symbols: np.ndarray
    bits: np.ndarray
    rms_evm: float
    ber: float
    sync_offset: int = 0

    def to_text(self) -> str:
        return (
            f"rms_evm_percent = {self.rms_evm:.6f}\n"
            f"ber = {self.ber:.6e}\n"
            f"sync_offset = {self.sync_offset}\n"
            f"symbols = {self.symbols.size}\n"
            f"bits = {self.bits.size}\n"
        )


def barker_autocorrelation(seq=BARKER13) -> np.ndarray:
    seq = np.asarray(seq, dtype=np.int64)
    return np.correlate(seq, seq, mode="full")


def extract_phase(w: IqWaveform) -> np.ndarray:
    """Principal-value phase per sample in ``(-pi, pi]``; zero samples give 0."""
    x = w.samples
    if x.size == 0:
        raise UsageError("empty waveform")
    phase = np.angle(x)
    phase[phase <= -np.pi] = np.pi
    phase[x == 0] = 0.0
    return phase


def sync_template(fmt: FrameFormat, samples_per_symbol: int) -> np.ndarray:
    """Zero-mean ``+-1`` switching pattern of the sync segment, one value per sample."""
    if samples_per_symbol < 4:
        raise UsageError("samples_per_symbol must be >= 4")
    tc = symbols_to_timecode(fmt.sync_symbols, 1.0, control_clock=samples_per_symbol)
    template = 1.0 - 2.0 * tc.raster()
    return template - template.mean()


def sync_correlation(w: IqWaveform, fmt: FrameFormat, samples_per_symbol: int) -> np.ndarray:
    """Cross-correlation of the mean-removed received phase with the sync pattern.

    The phase is measured against the frame's switching axis, found from the
    angle of ``sum(x**2)``, and turned so the two switching levels sit near
    ``+-pi/2``, away from the principal-value cut.
    """
    x = w.samples
    axis = 0.5 * np.angle(np.sum(x * x))
    turned = IqWaveform(x * np.exp(1j * (np.pi / 2 - axis)), w.sample_rate, w.t0)
    phase = extract_phase(turned)
    phase = phase - phase.mean()
    template = sync_template(fmt, samples_per_symbol)
    if phase.size < template.size:
        raise UsageError("waveform shorter than the sync segment")
    return sps.correlate(phase, template, mode="valid", method="auto")


def barker_sync(w: IqWaveform, fmt: FrameFormat, samples_per_symbol: int, threshold: float = 2.0) -> int:
    """Sample index where the frame's sync segment begins.

    Only offsets that leave room for the whole frame are candidates. Raises
    :class:`SyncError` when the correlation peak is less than ``threshold``
    times the strongest value at least one chip away from it. Closer lags are
    main lobe: a 50 % duty chip pattern shifted by half a chip correlates at
    exactly -1/2 of the peak.
    """
    frame_samples = fmt.total_symbols * samples_per_symbol
    if w.samples.size < frame_samples:
        raise UsageError(f"waveform has {w.samples.size} samples, a frame needs {frame_samples}")
    corr = np.abs(sync_correlation(w, fmt, samples_per_symbol))
    corr = corr[: w.samples.size - frame_samples + 1]
    peak = int(np.argmax(corr))
    guard = samples_per_symbol - 1
    rest = np.concatenate([corr[: max(0, peak - guard)], corr[peak + guard + 1:]])
    second = rest.max() if rest.size else 0.0
    if corr[peak] == 0 or (second > 0 and corr[peak] / second < threshold):
        ratio = corr[peak] / second if second > 0 else 0.0
        raise SyncError(f"sync peak/second-peak ratio {ratio:.2f} below {threshold}")
    return peak


def demod_symbols(
    w: IqWaveform,
    offset: int,
    fmt: FrameFormat,
    F_p: float,
    sample_rate: Optional[float] = None,
    repeat: int = 1,
) -> np.ndarray:
    """+F_p Fourier coefficient of each symbol window.

    The DFT bin is corrected for the sample-and-hold shape of the waveform,
    so a noiseless window returns the harmonic coefficient of its slot.
    Returns one value per frame symbol, sync segment first. A window cut
    short by the end of the waveform is dropped with a warning.
    """
    if sample_rate is None:
        sample_rate = w.sample_rate
    ratio = sample_rate / F_p
    L = int(round(ratio))
    if L < 2 or abs(ratio - L) > 1e-9 * ratio:
        raise ConfigurationError(f"sample_rate/F_p = {ratio:g} is not an integer", key="sample_rate")
    window = L * repeat
    if offset < 0:
        raise UsageError("negative offset")
    available = (w.samples.size - offset) // window
    count = fmt.total_symbols
    if available < count:
        warnings.warn(f"waveform ends after {available} of {count} symbols; truncated window dropped")
        count = max(available, 0)
    block = w.samples[offset:offset + count * window].reshape(count, window)
    kernel = np.exp(-2j * np.pi * repeat * np.arange(window) / window) / window
    # samples are held for 1/L of a period; undo the hold's delay and droop
    hold = np.exp(-1j * np.pi / L) * np.sinc(1.0 / L)
    return (block @ kernel) * hold


def estimate_gain(raw_pilots, reference_pilots) -> complex:
    """Least-squares scalar ``g`` minimizing ``|raw - g * reference|**2``."""
    raw_pilots = np.asarray(raw_pilots, dtype=complex)
    reference_pilots = np.asarray(reference_pilots, dtype=complex)
    if raw_pilots.size == 0 or raw_pilots.size != reference_pilots.size:
        raise UsageError("need matching, non-empty pilot sequences")
    energy = float(np.sum(np.abs(reference_pilots) ** 2))
    if energy == 0.0:
        raise EqualizationError("reference pilots have zero energy")
    g = complex(np.sum(raw_pilots * np.conj(reference_pilots)) / energy)
    if g == 0:
        raise EqualizationError("received pilots have zero energy")
    return g


def equalize(raw, fmt: FrameFormat, reference_pilots=None) -> np.ndarray:
    """Divide every symbol by the channel gain fitted on the pilot block."""
    raw = np.asarray(raw, dtype=complex)
    pilots = fmt.pilots if reference_pilots is None else np.asarray(reference_pilots, dtype=complex)
    if raw.size < pilots.size:
        raise UsageError("fewer received symbols than pilots")
    return raw / estimate_gain(raw[: pilots.size], pilots)


def metrics(equalized, sent_symbols, sent_bits, order: int, sync_offset: int = 0) -> DemodReport:
    equalized = np.asarray(equalized, dtype=complex).reshape(-1)
    sent_symbols = np.asarray(sent_symbols, dtype=complex).reshape(-1)
    sent_bits = np.asarray(sent_bits, dtype=np.uint8).reshape(-1)
    k = bits_per_symbol(order)
    if equalized.size != sent_symbols.size or sent_bits.size != k * sent_symbols.size:
        raise UsageError(
            f"length mismatch: {equalized.size} received, {sent_symbols.size} sent symbols, {sent_bits.size} bits"
        )
    bits = qam_demap(equalized, order)
    if sent_symbols.size == 0:
        return DemodReport(equalized, bits, 0.0, 0.0, sync_offset)
    ref = float(np.mean(np.abs(sent_symbols) ** 2))
    evm = 100.0 * math.sqrt(float(np.mean(np.abs(equalized - sent_symbols) ** 2)) / ref)
    ber = float(np.count_nonzero(bits != sent_bits)) / sent_bits.size
    return DemodReport(equalized, bits, evm, ber, sync_offset)


def write_constellation_csv(path, symbols, order: int) -> Path:
    path = Path(path)
    symbols = np.asarray(symbols, dtype=complex).reshape(-1)
    k = bits_per_symbol(order)
    decided = qam_demap(symbols, order).reshape(-1, k)
    index = decided @ (1 << np.arange(k - 1, -1, -1)) if symbols.size else np.zeros(0, dtype=int)
    data = np.column_stack([symbols.real, symbols.imag, index])
    np.savetxt(path, data, delimiter=",", header="I,Q,decided_symbol_index", comments="", fmt=["%.9g", "%.9g", "%d"])
    return path
