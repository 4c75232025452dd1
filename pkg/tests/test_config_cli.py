import csv
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from risdm.cli import main
from risdm.config import ExperimentConfig, load_config, parse_config
from risdm.errors import ConfigurationError


def test_defaults_reproduce_reference_parameters():
    cfg = ExperimentConfig()
    g, m, ln = cfg.geometry, cfg.modulation, cfg.link
    assert (g.M, g.N, g.d, g.f_c, g.feed) == (16, 16, 0.043, 3.6e9, (0.0, 0.0, -0.2))
    assert (m.F_p, m.sample_rate, m.order) == (100e3, 20e6, 16)
    assert (ln.theta_deg, ln.phi_deg, ln.snr_db) == (30.0, 0.0, (10.0,))
    assert parse_config("") == cfg


def test_parse_values():
    cfg = parse_config(
        """
        [geometry]
        M = 8
        feed = none
        [modulation]
        order = 64
        [link]
        snr_db = -10:10:5   # inclusive range
        ber_orders = 4, 16
        payload_bits = 0101 1100
        path_loss = no
        [output]
        dir = results
        """
    )
    assert cfg.geometry.M == 8 and cfg.geometry.feed is None
    assert cfg.link.snr_db == (-10.0, -5.0, 0.0, 5.0, 10.0)
    assert cfg.link.ber_orders == (4, 16)
    assert cfg.payload().tolist() == [0, 1, 0, 1, 1, 1, 0, 0]
    assert cfg.link.path_loss is False
    assert cfg.output_dir == Path("results")


@pytest.mark.parametrize(
    "text,key",
    [
        ("[geometry]\nM = 4\nq = 1\n", "geometry.q"),
        ("[nothing]\n", "[nothing]"),
        ("[modulation]\norder = 8\n", "modulation.order"),
        ("[modulation]\nsample_rate = 30e6\n", "modulation.sample_rate"),
        ("[geometry]\nd = -1\n", "geometry"),
        ("[link]\npayload_bits = 012\n", "link.payload_bits"),
        ("[link]\npath_loss = maybe\n", "link.path_loss"),
        ("[link]\nsnr_db = 1:2\n", "link.snr_db"),
    ],
)
def test_invalid_config_names_the_key(text, key):
    with pytest.raises(ConfigurationError) as err:
        parse_config(text)
    assert err.value.key == key
    assert key in str(err.value)


def test_random_payload_is_seeded():
    a = ExperimentConfig().with_seed(3).payload()
    assert a.size == 1024
    np.testing.assert_array_equal(a, ExperimentConfig().with_seed(3).payload())
    assert not np.array_equal(a, ExperimentConfig().with_seed(4).payload())
    with pytest.raises(ConfigurationError):
        load_config("/nonexistent/file.ini")


def write_cfg(tmp_path, body="", lead=250):
    path = tmp_path / "exp.ini"
    path.write_text(f"[link]\npayload_length = 96\nlead_samples = {lead}\nnfft = 512\n" + body)
    return str(path)


def invoke(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def test_pattern_command(tmp_path):
    cfg = write_cfg(tmp_path)
    r = invoke("pattern", "--config", cfg, "--out", str(tmp_path / "a"))
    assert r.exit_code == 0
    assert "beamforming_gain_db = 22.2155" in r.output
    invoke("pattern", "--config", cfg, "--out", str(tmp_path / "b"))
    for name in ("pattern_time_only.csv", "pattern_joint.csv", "pattern_summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_pattern_single_element(tmp_path):
    cfg = write_cfg(tmp_path)
    Path(cfg).write_text(Path(cfg).read_text() + "[geometry]\nM = 1\nN = 1\n")
    r = invoke("pattern", "--config", cfg, "--out", str(tmp_path))
    assert r.exit_code == 0
    assert "beamforming_gain_db = 0.0000" in r.output or "beamforming_gain_db = -0.0000" in r.output


def test_scan_command(tmp_path):
    r = invoke("scan", "--out", str(tmp_path))
    assert r.exit_code == 0
    rows = list(csv.DictReader(open(tmp_path / "scan.csv")))
    assert [float(x["commanded_deg"]) for x in rows] == [-45, -30, -15, 0, 15, 30, 45]


def test_link_command_noiseless_and_seeded(tmp_path):
    cfg = write_cfg(tmp_path)
    r = invoke("link", "--config", cfg, "--out", str(tmp_path / "q"), "--no-noise")
    assert r.exit_code == 0
    for coding in ("time_only", "joint"):
        report = (tmp_path / "q" / f"report_{coding}.txt").read_text()
        assert "ber = 0.000000e+00" in report
        assert "sync_offset = 250" in report
    invoke("link", "--config", cfg, "--out", str(tmp_path / "x"), "--seed", "9")
    invoke("link", "--config", cfg, "--out", str(tmp_path / "y"), "--seed", "9")
    for name in ("waveform_joint.csv", "constellation_time_only.csv", "spectrum_joint.csv", "report_joint.txt"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    header = open(tmp_path / "x" / "constellation_joint.csv").readline().strip()
    assert header == "I,Q,decided_symbol_index"


def test_link_sync_failure_is_a_diagnostic(tmp_path):
    cfg = write_cfg(tmp_path, "snr_db = -60\n", lead=6000)
    r = CliRunner().invoke(main, ["link", "--config", cfg, "--out", str(tmp_path)])
    assert r.exit_code != 0
    assert "SyncError" in r.output and "coding at SNR -60.0 dB" in r.output


def test_ber_command(tmp_path):
    cfg = write_cfg(tmp_path, "ber_snr_db = -40, 40\nber_orders = 4\nber_bits = 2000\nper_frame = 50\n")
    r = invoke("ber", "--config", cfg, "--out", str(tmp_path))
    assert r.exit_code == 0
    rows = list(csv.DictReader(open(tmp_path / "ber.csv")))
    assert list(rows[0]) == ["snr_db", "order", "coding", "ber", "bits"]
    assert len(rows) == 4
    assert all(float(x["ber"]) == 0.0 for x in rows if x["snr_db"] == "40")


def test_codegen_codecheck(tmp_path):
    bits = "0110" * 13
    r = invoke("codegen", "--payload", bits, "--out", str(tmp_path))
    assert r.exit_code == 0
    path = tmp_path / "schedule.txt"
    r = invoke("codecheck", str(path))
    assert r.exit_code == 0 and r.output.strip() == bits
    lines = path.read_text().splitlines()
    lines[1] = "M sixteen"
    path.write_text("\n".join(lines) + "\n")
    r = CliRunner().invoke(main, ["codecheck", str(path)])
    assert r.exit_code != 0 and "line 2" in r.output


def test_codecheck_reports_tampering(tmp_path):
    invoke("codegen", "--payload", "0110" * 4, "--out", str(tmp_path))
    path = tmp_path / "schedule.txt"
    lines = path.read_text().splitlines()
    at = lines.index("data") + 1 + 14 * 200 + 5
    lines[at] = ("1" if lines[at][0] == "0" else "0") + lines[at][1:]
    path.write_text("\n".join(lines) + "\n")
    r = CliRunner().invoke(main, ["codecheck", str(path)])
    assert r.exit_code == 1
    assert "payload symbol 1" in r.output


def test_bad_config_exits_nonzero(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[geometry]\nwidth = 3\n")
    r = CliRunner().invoke(main, ["pattern", "--config", str(path)])
    assert r.exit_code == 2
    assert "geometry.width" in r.output
