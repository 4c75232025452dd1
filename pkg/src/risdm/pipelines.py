"""Reproduction pipelines behind the command line: pattern, scan, link, BER
sweep, and schedule generation/checking. Every pipeline writes plain CSV or
text files into an output directory and returns its key numbers."""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .coding import SpaceCoding, bits_per_symbol, qam_map, space_coding
from .config import ExperimentConfig
from .errors import FramingError, SyncError
from .link import CODINGS, BerPoint, ber_sweep, frame_stream, run_frame, transmit
from .patterns import beam_scan, beamforming_gain, power_pattern, write_pattern_csv
from .rx import BARKER13, DemodReport, write_constellation_csv
from .schedule import CheckResult, ScheduleHeader, check_schedule, encode_payload, write_schedule
from .synthesis import power_spectrum, write_spectrum_csv, write_waveform_csv

log = logging.getLogger(__name__)

__all__ = [
    "run_pattern",
    "run_scan",
    "run_link",
    "run_ber_sweep",
    "run_codegen",
    "run_codecheck",
]


def _outdir(cfg: ExperimentConfig, out: Optional[Path]) -> Path:
    path = Path(out) if out is not None else Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_pattern(cfg: ExperimentConfig, out=None) -> Dict[str, float]:
    """Unsteered and steered pattern cuts plus the gain at the link direction."""
    out = _outdir(cfg, out)
    geom, direction = cfg.geometry, cfg.direction
    steered = power_pattern(geom, space_coding(geom, direction), phi_deg=cfg.link.phi_deg)
    flat = power_pattern(geom, SpaceCoding.zeros(geom), phi_deg=cfg.link.phi_deg)
    write_pattern_csv(out / "pattern_time_only.csv", flat)
    write_pattern_csv(out / "pattern_joint.csv", steered)
    gain = beamforming_gain(geom, direction, cfg.link.path_loss)
    summary = {
        "theta_deg": cfg.link.theta_deg,
        "phi_deg": cfg.link.phi_deg,
        "beamforming_gain_db": gain,
        "steered_peak_theta_deg": steered.peak_theta_deg,
    }
    (out / "pattern_summary.txt").write_text("".join(f"{k} = {v:.6f}\n" for k, v in summary.items()))
    return summary


def run_scan(cfg: ExperimentConfig, out=None):
    out = _outdir(cfg, out)
    rows = beam_scan(cfg.geometry, cfg.link.scan_deg, cfg.link.phi_deg)
    with open(out / "scan.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["commanded_deg", "peak_deg", "gain_db"])
        for r in rows:
            w.writerow([f"{r.commanded_deg:.1f}", f"{r.peak_deg:.1f}", f"{r.gain_db:.6f}"])
    return rows


def run_link(cfg: ExperimentConfig, out=None, no_noise: bool = False) -> Dict[str, DemodReport]:
    """Send the configured payload with time-only and joint coding at the first
    configured SNR, then write waveform, spectrum, constellation and report
    files for each."""
    out = _outdir(cfg, out)
    setup = cfg.setup()
    bits = cfg.payload()
    k = bits_per_symbol(setup.order)
    if bits.size % k:
        raise FramingError(f"payload of {bits.size} bits is not a multiple of {k}")
    payload = qam_map(bits, setup.order)
    stream = frame_stream(payload, payload.size) if payload.size else BARKER13.astype(complex)[None, :]
    snr = float("inf") if no_noise else cfg.link.snr_db[0]

    clean = {coding: transmit(setup, stream, coding) for coding in CODINGS}
    reference = clean["time_only"].mean_power()

    reports = {}
    for idx, coding in enumerate(CODINGS):
        seed = int(np.random.SeedSequence([cfg.link.seed, idx]).generate_state(1)[0])
        try:
            res = run_frame(
                setup, bits, snr, reference, seed=seed, coding=coding,
                lead_samples=cfg.link.lead_samples, clean=clean[coding],
            )
        except SyncError as exc:
            raise SyncError(f"{coding} coding at SNR {snr} dB: {exc}") from exc
        rep = res.report
        reports[coding] = rep
        write_waveform_csv(out / f"waveform_{coding}.csv", res.received)
        nfft = min(cfg.link.nfft, len(res.received))
        f, p = power_spectrum(res.received, nfft)
        write_spectrum_csv(out / f"spectrum_{coding}.csv", f, p)
        write_constellation_csv(out / f"constellation_{coding}.csv", rep.symbols, setup.order)
        text = f"coding = {coding}\nsnr_db = {snr}\norder = {setup.order}\n" + rep.to_text()
        text += f"mean_power_db = {10 * np.log10(res.clean.mean_power()):.6f}\n"
        (out / f"report_{coding}.txt").write_text(text)
        log.info("%s: evm=%.3f%% ber=%.3e offset=%d", coding, rep.rms_evm, rep.ber, rep.sync_offset)
    return reports


def run_ber_sweep(cfg: ExperimentConfig, out=None, orders=None, snr_db=None, n_bits=None) -> List[BerPoint]:
    out = _outdir(cfg, out)
    orders = cfg.link.ber_orders if orders is None else orders
    snr_db = cfg.link.ber_snr_db if snr_db is None else snr_db
    n_bits = cfg.link.ber_bits if n_bits is None else n_bits
    points: List[BerPoint] = []
    for order in orders:
        points += ber_sweep(
            cfg.setup(order), snr_db, n_bits=n_bits, seed=cfg.link.seed,
            per_frame=cfg.link.per_frame, workers=cfg.link.workers,
        )
    with open(out / "ber.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "order", "coding", "ber", "bits"])
        for p in points:
            w.writerow([f"{p.snr_db:g}", p.order, p.coding, f"{p.ber:.6e}", p.bits])
    return points


def run_codegen(cfg: ExperimentConfig, payload, path) -> Path:
    """Write the joint schedule for ``payload`` (sync block first) to ``path``."""
    m = cfg.modulation
    bits = np.asarray(payload, dtype=np.uint8).reshape(-1)
    schedule = encode_payload(cfg.geometry, cfg.direction, bits, m.order, 1.0 / m.F_p, m.control_clock, m.repeat)
    header = ScheduleHeader(
        cfg.geometry, cfg.direction, 1.0 / m.F_p, m.control_clock, m.repeat, m.order, int(bits.size), schedule.n_ticks
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return write_schedule(path, schedule, header)


def run_codecheck(path) -> CheckResult:
    return check_schedule(path)
