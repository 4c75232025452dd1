"""Experiment configuration: INI-style sections, strict keys, numeric-simulation defaults.

Example::

    [geometry]
    M = 16
    N = 16
    d = 0.043
    f_c = 3.6e9
    feed = 0, 0, -0.2

    [modulation]
    order = 16
    F_p = 100e3

    [link]
    theta_deg = 30
    snr_db = 10

Unknown sections or keys are rejected so a typo never silently falls back
to a default.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .array import ArrayGeometry, Direction
from .coding import QAM_ORDERS
from .errors import ConfigurationError, RisdmError
from .link import LinkSetup

__all__ = ["ModulationConfig", "LinkConfig", "ExperimentConfig", "load_config", "parse_config"]


@dataclass(frozen=True)
class ModulationConfig:
    order: int = 16
    F_p: float = 100e3
    control_clock: int = 200
    sample_rate: float = 20e6
    repeat: int = 1


@dataclass(frozen=True)
class LinkConfig:
    theta_deg: float = 30.0
    phi_deg: float = 0.0
    snr_db: Tuple[float, ...] = (10.0,)
    seed: int = 0
    payload_bits: Optional[str] = None
    payload_length: int = 1024
    lead_samples: int = 1000
    path_loss: bool = True
    nfft: int = 4096
    ber_snr_db: Tuple[float, ...] = tuple(float(s) for s in range(-30, 21, 2))
    ber_orders: Tuple[int, ...] = QAM_ORDERS
    ber_bits: int = 100_000
    per_frame: int = 250
    workers: int = 1
    scan_deg: Tuple[float, ...] = (-45.0, -30.0, -15.0, 0.0, 15.0, 30.0, 45.0)


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    modulation: ModulationConfig = field(default_factory=ModulationConfig)
    link: LinkConfig = field(default_factory=LinkConfig)
    output_dir: Path = Path("out")

    @property
    def direction(self) -> Direction:
        return Direction.from_degrees(self.link.theta_deg, self.link.phi_deg)

    def setup(self, order: Optional[int] = None) -> LinkSetup:
        m = self.modulation
        return LinkSetup(
            geom=self.geometry,
            direction=self.direction,
            order=m.order if order is None else order,
            F_p=m.F_p,
            control_clock=m.control_clock,
            sample_rate=m.sample_rate,
            repeat=m.repeat,
            path_loss=self.link.path_loss,
        )

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, link=replace(self.link, seed=seed))

    def payload(self) -> np.ndarray:
        """Configured payload bits, or a seeded random payload of ``payload_length`` bits."""
        if self.link.payload_bits is not None:
            return np.frombuffer(self.link.payload_bits.encode("ascii"), dtype=np.uint8) - ord("0")
        rng = np.random.default_rng(np.random.SeedSequence([self.link.seed, 0x9A7]))
        return rng.integers(0, 2, size=self.link.payload_length, dtype=np.uint8)


def _float_list(text: str) -> Tuple[float, ...]:
    """Comma list, or ``start:stop:step`` with ``stop`` included."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("range must be start:stop:step with step > 0")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(max(n, 0)))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _feed(text: str):
    if text.strip().lower() == "none":
        return None
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("feed needs three comma-separated coordinates or 'none'")
    return tuple(parts)


def _bits(text: str) -> str:
    s = "".join(text.split())
    if s.strip("01"):
        raise ValueError("payload_bits must contain only 0 and 1")
    return s


_SCHEMA = {
    "geometry": {"M": int, "N": int, "d": float, "f_c": float, "feed": _feed},
    "modulation": {"order": int, "F_p": float, "control_clock": int, "sample_rate": float, "repeat": int},
    "link": {
        "theta_deg": float,
        "phi_deg": float,
        "snr_db": _float_list,
        "seed": int,
        "payload_bits": _bits,
        "payload_length": int,
        "lead_samples": int,
        "path_loss": _bool,
        "nfft": int,
        "ber_snr_db": _float_list,
        "ber_orders": lambda s: tuple(int(p) for p in s.split(",")),
        "ber_bits": int,
        "per_frame": int,
        "workers": int,
        "scan_deg": _float_list,
    },
    "output": {"dir": Path},
}


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(str(exc)) from None

    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError("unknown section", key=f"[{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigurationError("unknown key", key=f"{section}.{key}")
            try:
                values[(section, key)] = _SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigurationError(f"bad value {raw!r} ({exc})", key=f"{section}.{key}") from None

    def pick(section):
        return {k: v for (s, k), v in values.items() if s == section}

    try:
        geometry = ArrayGeometry(**pick("geometry"))
    except RisdmError as exc:
        raise ConfigurationError(str(exc), key="geometry") from None
    modulation = ModulationConfig(**pick("modulation"))
    link = LinkConfig(**pick("link"))
    out = values.get(("output", "dir"), Path("out"))
    cfg = ExperimentConfig(geometry, modulation, link, out)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    m, ln = cfg.modulation, cfg.link
    if m.order not in QAM_ORDERS:
        raise ConfigurationError(f"must be one of {QAM_ORDERS}", key="modulation.order")
    for o in ln.ber_orders:
        if o not in QAM_ORDERS:
            raise ConfigurationError(f"{o} not in {QAM_ORDERS}", key="link.ber_orders")
    if not m.F_p > 0:
        raise ConfigurationError("must be > 0", key="modulation.F_p")
    if m.control_clock < 4:
        raise ConfigurationError("must be >= 4", key="modulation.control_clock")
    if m.repeat < 1:
        raise ConfigurationError("must be >= 1", key="modulation.repeat")
    if not 0 <= abs(ln.theta_deg) <= 90:
        raise ConfigurationError("must lie in [-90, 90]", key="link.theta_deg")
    if ln.payload_length < 0 or ln.lead_samples < 0 or ln.ber_bits < 1 or ln.per_frame < 1 or ln.workers < 1:
        raise ConfigurationError("counts must be non-negative (ber_bits, per_frame, workers >= 1)", key="link")
    try:
        cfg.setup()
    except ConfigurationError as exc:
        raise ConfigurationError(exc.reason, key=f"modulation.{exc.key}" if exc.key else "modulation") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", key=str(path)) from None
    return parse_config(text)
