"""Text serialization of joint schedules and the payload checker.

File layout::

    # risdm joint schedule v1
    M 16
    N 16
    ...                      (one ``key value...`` per line)
    data
    0110...                  (one line per tick, M*N chars, row-major)

The header carries everything needed to rebuild the space coding, so the
checker can split every tick back into ``Gamma`` and ``G``, decode each
switching period to a constellation point, and re-encode it to confirm the
slot is exactly what the encoder would have produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, TextIO

import numpy as np

from .array import ArrayGeometry, Direction
from .coding import (
    JointSchedule,
    bits_per_symbol,
    joint_code,
    qam_constellation,
    qam_demap,
    qam_map,
    space_coding,
    symbols_to_timecode,
)
from .errors import ConfigurationError, ScheduleParseError
from .harmonics import MAX_FIRST_HARMONIC, SlotCode, harmonic_coefficient
from .rx import BARKER13

__all__ = [
    "MAGIC",
    "MAPPING_NOTE",
    "ScheduleHeader",
    "Mismatch",
    "CheckResult",
    "encode_payload",
    "write_schedule",
    "read_schedule",
    "check_schedule",
]

MAGIC = "# risdm joint schedule v1"
MAPPING_NOTE = (
    "gray-square-qam bits-msb-first I=first-half Q=second-half "
    "level-index-0=+1 corner-magnitude=1"
)


@dataclass(frozen=True)
class ScheduleHeader:
    geom: ArrayGeometry
    direction: Direction
    T_p: float
    control_clock: int
    repeat: int
    order: int
    payload_bits: int
    ticks: int

    @property
    def ticks_per_symbol(self) -> int:
        return self.control_clock * self.repeat

    def lines(self) -> List[str]:
        g = self.geom
        feed = "none" if g.feed is None else " ".join(repr(v) for v in g.feed)
        return [
            MAGIC,
            f"M {g.M}",
            f"N {g.N}",
            f"d {g.d!r}",
            f"f_c {g.f_c!r}",
            f"feed {feed}",
            f"direction_rad {self.direction.theta!r} {self.direction.phi!r}",
            f"T_p {self.T_p!r}",
            f"control_clock {self.control_clock}",
            f"repeat {self.repeat}",
            f"order {self.order}",
            f"mapping {MAPPING_NOTE}",
            "sync barker13",
            f"payload_bits {self.payload_bits}",
            f"ticks {self.ticks}",
        ]


def _check_resolution(order: int, T_p: float, control_clock: int) -> None:
    points = qam_constellation(order)
    slots = symbols_to_timecode(points, T_p, control_clock).slots
    got = np.array([harmonic_coefficient(s, 1) for s in slots]) / MAX_FIRST_HARMONIC
    if not np.array_equal(qam_demap(got, order), qam_demap(points, order)):
        raise ConfigurationError(
            f"{control_clock} ticks per period cannot place every {order}-QAM point", key="control_clock"
        )


def encode_payload(
    geom: ArrayGeometry,
    direction: Direction,
    bits,
    order: int,
    T_p: float,
    control_clock: int = 200,
    repeat: int = 1,
) -> JointSchedule:
    """Sync block plus payload symbols, time coded and XORed with the space coding.

    Raises :class:`ConfigurationError` when ``control_clock`` is too coarse
    for some constellation point to survive snapping to whole ticks.
    """
    _check_resolution(order, T_p, control_clock)
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    stream = np.concatenate([BARKER13.astype(complex), qam_map(bits, order)])
    tc = symbols_to_timecode(stream, T_p, control_clock, repeat)
    return joint_code(space_coding(geom, direction), tc)


def write_schedule(path, schedule: JointSchedule, header: ScheduleHeader) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(("\n".join(header.lines()) + "\ndata\n").encode("ascii"))
        for _, frames in schedule.frame_chunks(4096):
            rows = frames.reshape(frames.shape[0], -1) + ord("0")
            rows = np.concatenate([rows, np.full((rows.shape[0], 1), ord("\n"), dtype=rows.dtype)], axis=1)
            fh.write(rows.astype(np.uint8).tobytes())
    return path


def _parse_header(fh: TextIO):
    first = fh.readline().rstrip("\n")
    if first != MAGIC:
        raise ScheduleParseError(f"expected {MAGIC!r}", line=1)
    values = {}
    lineno = 1
    for raw in fh:
        lineno += 1
        line = raw.rstrip("\n")
        if line == "data":
            break
        key, _, rest = line.partition(" ")
        if not key or not rest:
            raise ScheduleParseError(f"expected 'key value', got {line!r}", line=lineno)
        if key in values:
            raise ScheduleParseError(f"duplicate key {key!r}", line=lineno)
        values[key] = (rest, lineno)
    else:
        raise ScheduleParseError("missing 'data' line", line=lineno + 1)

    def take(key, conv):
        if key not in values:
            raise ScheduleParseError(f"missing header key {key!r}", line=lineno)
        rest, at = values.pop(key)
        try:
            return conv(rest)
        except (ValueError, TypeError) as exc:
            raise ScheduleParseError(f"bad value for {key!r}: {exc}", line=at) from None

    def floats(n):
        def conv(s):
            parts = s.split()
            if len(parts) != n:
                raise ValueError(f"expected {n} numbers")
            return tuple(float(p) for p in parts)
        return conv

    M = take("M", int)
    N = take("N", int)
    d = take("d", float)
    f_c = take("f_c", float)
    feed = take("feed", lambda s: None if s.strip() == "none" else floats(3)(s))
    theta, phi = take("direction_rad", floats(2))
    T_p = take("T_p", float)
    control_clock = take("control_clock", int)
    repeat = take("repeat", int)
    order = take("order", int)
    mapping = take("mapping", str)
    sync = take("sync", str)
    payload_bits = take("payload_bits", int)
    ticks = take("ticks", int)
    if mapping != MAPPING_NOTE:
        raise ScheduleParseError(f"unsupported mapping {mapping!r}", line=lineno)
    if sync != "barker13":
        raise ScheduleParseError(f"unsupported sync {sync!r}", line=lineno)
    if values:
        key, (_, at) = next(iter(values.items()))
        raise ScheduleParseError(f"unknown header key {key!r}", line=at)
    try:
        header = ScheduleHeader(
            ArrayGeometry(M, N, d, f_c, feed),
            Direction(theta, phi),
            T_p,
            control_clock,
            repeat,
            order,
            payload_bits,
            ticks,
        )
        k = bits_per_symbol(order)
    except ValueError as exc:
        raise ScheduleParseError(str(exc), line=lineno) from None
    if payload_bits % k:
        raise ScheduleParseError(f"payload_bits {payload_bits} not a multiple of {k}", line=lineno)
    return header, lineno


def read_schedule(path):
    """Parse a schedule file into its header and a ``(ticks, M, N)`` uint8 array."""
    with open(path, "r", encoding="ascii", newline="\n") as fh:
        header, lineno = _parse_header(fh)
        width = header.geom.M * header.geom.N
        rows = []
        for i, raw in enumerate(fh):
            line = raw.rstrip("\n")
            at = lineno + 1 + i
            if len(line) != width or line.strip("01"):
                raise ScheduleParseError(f"tick row must be {width} characters of 0/1", line=at)
            rows.append(line)
    if len(rows) != header.ticks:
        raise ScheduleParseError(f"header announces {header.ticks} ticks, found {len(rows)}", line=lineno + 1 + len(rows))
    if header.ticks % header.ticks_per_symbol:
        raise ScheduleParseError("tick count is not a whole number of symbol periods", line=lineno)
    if rows:
        data = np.frombuffer("".join(rows).encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        data = np.zeros(0, dtype=np.uint8)
    return header, data.reshape(len(rows), header.geom.M, header.geom.N)


@dataclass(frozen=True)
class Mismatch:
    """A schedule defect. ``symbol`` counts frame symbols from 0 (sync first);
    ``payload_symbol`` is ``None`` inside the sync block."""

    tick: int
    symbol: int
    payload_symbol: Optional[int]
    kind: str
    detail: str = ""

    def __str__(self):
        where = "sync" if self.payload_symbol is None else f"payload symbol {self.payload_symbol}"
        return f"tick {self.tick} ({where}, frame symbol {self.symbol}): {self.kind} {self.detail}".rstrip()


@dataclass
class CheckResult:
    header: ScheduleHeader
    payload: np.ndarray
    mismatches: List[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def _decode_period(g: np.ndarray):
    """``(start, on)`` ticks of a single circular ON run, or ``None``."""
    on = int(g.sum())
    if on == 0:
        return 0, 0
    if on == g.size:
        return 0, on
    rising = np.flatnonzero((g == 1) & (np.roll(g, 1) == 0))
    if rising.size != 1:
        return None
    return int(rising[0]), on


def check_schedule(path) -> CheckResult:
    """Recover the payload from a schedule file and list every inconsistency."""
    header, frames = read_schedule(path)
    tps = header.ticks_per_symbol
    C = header.control_clock
    n_sym = header.ticks // tps
    gamma = space_coding(header.geom, header.direction).bits
    mismatches: List[Mismatch] = []

    def locate(tick, kind, detail=""):
        sym = tick // tps
        mismatches.append(Mismatch(tick, sym, sym - 13 if sym >= 13 else None, kind, detail))

    # split every tick into Gamma xor G
    residual = (frames ^ gamma[None]).reshape(header.ticks, -1)
    ones = residual.sum(axis=1)
    g = (ones * 2 > residual.shape[1]).astype(np.uint8)
    for tick in np.flatnonzero((ones != 0) & (ones != residual.shape[1])).tolist():
        bad = int(min(ones[tick], residual.shape[1] - ones[tick]))
        locate(tick, "element-mismatch", f"{bad} element(s) disagree with the space coding")

    if n_sym < 13:
        locate(0, "truncated", "schedule shorter than the sync block")
        return CheckResult(header, np.zeros(0, dtype=np.uint8), mismatches)

    symbols = np.zeros(n_sym, dtype=complex)
    starts = np.zeros(n_sym, dtype=np.int64)
    ons = np.zeros(n_sym, dtype=np.int64)
    decodable = np.ones(n_sym, dtype=bool)
    for s in range(n_sym):
        block = g[s * tps:(s + 1) * tps].reshape(header.repeat, C)
        if header.repeat > 1 and np.any(block != block[0]):
            locate(s * tps, "repeat-mismatch", "repeated periods differ")
        slot = _decode_period(block[0])
        if slot is None:
            locate(s * tps, "slot-shape", "ON state is not a single run")
            decodable[s] = False
            continue
        starts[s], ons[s] = slot
        slot_code = SlotCode(ons[s] / C, starts[s] * header.T_p / C, header.T_p)
        symbols[s] = harmonic_coefficient(slot_code, 1) / MAX_FIRST_HARMONIC

    payload_syms = symbols[13:]
    payload = qam_demap(payload_syms, header.order)
    expected = np.concatenate([BARKER13.astype(complex), qam_map(payload, header.order)])
    ref = symbols_to_timecode(expected, header.T_p, C, header.repeat)
    for s in np.flatnonzero(decodable & ((ref.start_ticks != starts) | (ref.on_ticks != ons))).tolist():
        kind = "sync-mismatch" if s < 13 else "slot-mismatch"
        locate(s * tps, kind, f"slot (start={starts[s]}, on={ons[s]}) is not a constellation slot")

    if payload.size != header.payload_bits:
        locate(13 * tps, "length-mismatch", f"decoded {payload.size} bits, header says {header.payload_bits}")
    mismatches.sort(key=lambda m: (m.tick, m.kind))
    return CheckResult(header, payload.astype(np.uint8), mismatches)
