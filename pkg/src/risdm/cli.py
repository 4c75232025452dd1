"""Command line front end.

Every subcommand reads an optional configuration file (defaults reproduce the
numeric-simulation parameter set), writes plot-ready CSV/text into the output
directory, and exits nonzero with a one-line diagnostic on failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Optional

import click

from .config import ExperimentConfig, load_config
from .errors import RisdmError
from . import pipelines

log = logging.getLogger("risdm")


def _load(config: Optional[str], seed: Optional[int]) -> ExperimentConfig:
    cfg = load_config(config) if config else ExperimentConfig()
    return cfg if seed is None else cfg.with_seed(seed)


def _common(f):
    f = click.option("--out", "out", type=click.Path(file_okay=False), default=None,
                     help="Output directory (overrides [output] dir).")(f)
    f = click.option("--seed", type=int, default=None, help="Master seed (overrides [link] seed).")(f)
    f = click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), default=None,
                     help="Experiment configuration file.")(f)
    return f


class _Group(click.Group):
    """Turns toolkit errors into a diagnostic line and exit status 2."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except RisdmError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(2)


@click.group(cls=_Group)
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def main(verbose: int) -> None:
    """Link-level simulator for joint space-time coded 1-bit surfaces."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@main.command()
@_common
def pattern(config, seed, out):
    """Unsteered and steered power patterns plus the beamforming gain."""
    summary = pipelines.run_pattern(_load(config, seed), out)
    click.echo(f"beamforming_gain_db = {summary['beamforming_gain_db']:.4f}")
    click.echo(f"steered_peak_theta_deg = {summary['steered_peak_theta_deg']:.1f}")


@main.command()
@_common
def scan(config, seed, out):
    """Pattern peak for each commanded steering angle."""
    for r in pipelines.run_scan(_load(config, seed), out):
        click.echo(f"{r.commanded_deg:6.1f} -> peak {r.peak_deg:6.1f}  gain {r.gain_db:7.3f} dB")


@main.command()
@_common
@click.option("--no-noise", is_flag=True, help="Skip the AWGN channel.")
def link(config, seed, out, no_noise):
    """One frame end to end, with and without space coding."""
    reports = pipelines.run_link(_load(config, seed), out, no_noise=no_noise)
    for coding, rep in reports.items():
        click.echo(f"{coding:9s} rms_evm = {rep.rms_evm:8.4f} %  ber = {rep.ber:.3e}  sync_offset = {rep.sync_offset}")


@main.command()
@_common
def ber(config, seed, out):
    """BER against SNR for every configured order and both codings."""
    points = pipelines.run_ber_sweep(_load(config, seed), out)
    click.echo(f"{len(points)} points written")


@main.command()
@_common
@click.option("--payload", default=None, help="Payload as a 0/1 string (default: the configured payload).")
@click.option("--file", "filename", default="schedule.txt", show_default=True, help="Schedule file name.")
def codegen(config, seed, out, payload, filename):
    """Write the joint control schedule for a payload."""
    cfg = _load(config, seed)
    if payload is None:
        bits = cfg.payload()
    else:
        text = "".join(payload.split())
        if text.strip("01"):
            raise click.BadParameter("payload must contain only 0 and 1", param_hint="--payload")
        bits = [int(c) for c in text]
    path = Path(out if out is not None else cfg.output_dir) / filename
    click.echo(str(pipelines.run_codegen(cfg, bits, path)))


@main.command()
@click.argument("schedule", type=click.Path(exists=True, dir_okay=False))
def codecheck(schedule):
    """Recover the payload from a schedule file and report any defects."""
    result = pipelines.run_codecheck(schedule)
    click.echo("".join(map(str, result.payload.tolist())))
    for m in result.mismatches:
        click.echo(f"mismatch: {m}", err=True)
    if not result.ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
