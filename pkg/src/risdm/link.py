"""End-to-end link runs: framing, waveform synthesis for both codings, noise,
reception and BER sweeps."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .array import ArrayGeometry, Direction
from .coding import (
    SpaceCoding,
    bits_per_symbol,
    joint_code,
    qam_demap,
    qam_map,
    space_coding,
    symbols_to_timecode,
)
from .errors import ConfigurationError, FramingError
from .rx import BARKER13, DemodReport, FrameFormat, barker_sync, demod_symbols, equalize, metrics
from .synthesis import ChannelConfig, IqWaveform, add_awgn, synthesize_rx

log = logging.getLogger(__name__)

__all__ = [
    "CODINGS",
    "LinkSetup",
    "LinkResult",
    "frame_stream",
    "transmit",
    "run_frame",
    "BerPoint",
    "ber_sweep",
    "point_rng",
]

CODINGS = ("time_only", "joint")


@dataclass(frozen=True)
class LinkSetup:
    geom: ArrayGeometry = field(default_factory=ArrayGeometry)
    direction: Direction = field(default_factory=lambda: Direction.from_degrees(30.0, 0.0))
    order: int = 16
    F_p: float = 100e3
    control_clock: int = 200
    sample_rate: float = 20e6
    repeat: int = 1
    path_loss: bool = True

    def __post_init__(self):
        bits_per_symbol(self.order)
        ratio = self.sample_rate / (self.F_p * self.control_clock)
        if ratio < 1 or abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ConfigurationError(
                f"sample_rate {self.sample_rate:g} is not an integer multiple of "
                f"F_p * control_clock = {self.F_p * self.control_clock:g}",
                key="sample_rate",
            )

    @property
    def T_p(self) -> float:
        return 1.0 / self.F_p

    @property
    def samples_per_symbol(self) -> int:
        return int(round(self.sample_rate / self.F_p)) * self.repeat

    @property
    def bit_rate(self) -> float:
        return bits_per_symbol(self.order) * self.F_p / self.repeat

    def space_for(self, coding: str) -> SpaceCoding:
        if coding == "time_only":
            return SpaceCoding.zeros(self.geom)
        if coding == "joint":
            return space_coding(self.geom, self.direction)
        raise ValueError(f"unknown coding {coding!r}")


def frame_stream(payload_symbols: np.ndarray, per_frame: int) -> np.ndarray:
    """Insert the Barker sync/pilot block ahead of every ``per_frame`` payload symbols.

    Returns shape ``(n_frames, 13 + per_frame)``.
    """
    payload_symbols = np.asarray(payload_symbols, dtype=complex).reshape(-1)
    if per_frame < 1 or payload_symbols.size % per_frame:
        raise FramingError(f"{payload_symbols.size} symbols do not fill frames of {per_frame}")
    body = payload_symbols.reshape(-1, per_frame)
    sync = np.broadcast_to(BARKER13.astype(complex), (body.shape[0], BARKER13.size))
    return np.concatenate([sync, body], axis=1)


def transmit(setup: LinkSetup, stream, coding: str) -> IqWaveform:
    """Noiseless received waveform for a flat symbol stream under ``coding``."""
    tc = symbols_to_timecode(np.ravel(stream), setup.T_p, setup.control_clock, setup.repeat)
    schedule = joint_code(setup.space_for(coding), tc)
    return synthesize_rx(setup.geom, schedule, setup.direction, setup.sample_rate, setup.path_loss)


@dataclass
class LinkResult:
    coding: str
    clean: IqWaveform
    received: IqWaveform
    report: DemodReport
    channel_gain: complex


def run_frame(
    setup: LinkSetup,
    bits,
    snr_db: float,
    reference: float,
    seed: Optional[int] = None,
    coding: str = "joint",
    lead_samples: int = 0,
    clean: Optional[IqWaveform] = None,
) -> LinkResult:
    """Send ``bits`` as one frame, add noise, then sync, demodulate and score.

    ``reference`` is the noise reference power (the time-only mean power).
    ``lead_samples`` idle samples precede the frame; the receiver has to
    find the frame with the Barker correlator.
    """
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    payload = qam_map(bits, setup.order)
    stream = frame_stream(payload, payload.size) if payload.size else BARKER13.astype(complex)[None, :]
    fmt = FrameFormat(payload_symbols=payload.size)
    if clean is None:
        clean = transmit(setup, stream, coding)
    tx = clean.prepend(np.zeros(lead_samples)) if lead_samples else clean
    rng = np.random.default_rng(seed)
    rx = add_awgn(tx, ChannelConfig(snr_db, reference, seed), rng=rng)
    offset = barker_sync(rx, fmt, setup.samples_per_symbol)
    raw = demod_symbols(rx, offset, fmt, setup.F_p, setup.sample_rate, setup.repeat)
    eq = equalize(raw, fmt)
    gain = complex(np.sum(raw[:13] * BARKER13) / 13.0)
    report = metrics(eq[13:], payload, bits, setup.order, sync_offset=offset)
    return LinkResult(coding, clean, rx, report, gain)


def point_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one sweep point, derived from ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in key]]))


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    order: int
    coding: str
    ber: float
    bits: int
    errors: int


def _score_point(setup, clean, payload_bits, n_frames, per_frame, reference, snr_db, rng):
    noisy = add_awgn(clean, ChannelConfig(snr_db, reference), rng=rng)
    frame_len = 13 + per_frame
    fmt_all = FrameFormat(payload_symbols=n_frames * frame_len - 13)
    raw = demod_symbols(noisy, 0, fmt_all, setup.F_p, setup.sample_rate, setup.repeat)
    raw = raw.reshape(n_frames, frame_len)
    pilots = BARKER13.astype(float)
    gains = raw[:, :13] @ pilots / np.dot(pilots, pilots)
    gains = np.where(gains == 0, 1e-300, gains)
    eq = raw[:, 13:] / gains[:, None]
    decided = qam_demap(eq.reshape(-1), setup.order)
    return int(np.count_nonzero(decided != payload_bits))


def ber_sweep(
    setup: LinkSetup,
    snr_db: Sequence[float],
    n_bits: int = 100_000,
    seed: int = 0,
    codings: Sequence[str] = CODINGS,
    per_frame: int = 250,
    workers: int = 1,
) -> List[BerPoint]:
    """BER against SNR for one modulation order.

    Frames are received at their known start (symbol timing is not
    re-acquired per point); each frame is equalized from its own pilots.
    Noise is referenced to the time-only mean received power, so both codings
    see the same absolute noise level at a given SNR.
    """
    k = bits_per_symbol(setup.order)
    bits_per_frame = k * per_frame
    n_frames = max(1, math.ceil(n_bits / bits_per_frame))
    src = point_rng(seed, setup.order, 0xB175)
    payload_bits = src.integers(0, 2, size=n_frames * bits_per_frame, dtype=np.uint8)
    stream = frame_stream(qam_map(payload_bits, setup.order), per_frame)

    clean: Dict[str, IqWaveform] = {c: transmit(setup, stream, c) for c in codings}
    if "time_only" in clean:
        reference = clean["time_only"].mean_power()
    else:
        reference = transmit(setup, stream, "time_only").mean_power()

    jobs = [
        (ci, coding, si, float(s))
        for ci, coding in enumerate(codings)
        for si, s in enumerate(snr_db)
    ]

    def run(job):
        ci, coding, si, s = job
        rng = point_rng(seed, setup.order, CODINGS.index(coding), si)
        errors = _score_point(setup, clean[coding], payload_bits, n_frames, per_frame, reference, s, rng)
        log.debug("order=%d coding=%s snr=%.2f errors=%d", setup.order, coding, s, errors)
        return BerPoint(s, setup.order, coding, errors / payload_bits.size, int(payload_bits.size), errors)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(j) for j in jobs]
