import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from risdm.array import ArrayGeometry, Direction, feed_distances
from risdm.coding import SpaceCoding, joint_code, qam_map, space_coding, symbols_to_timecode
from risdm.errors import ConfigurationError, UsageError
from risdm.patterns import beamforming_gain
from risdm.synthesis import (
    ChannelConfig,
    IqWaveform,
    add_awgn,
    power_spectrum,
    reference_power,
    synthesize_rx,
    write_spectrum_csv,
    write_waveform_csv,
)

SMALL = ArrayGeometry(M=4, N=3, d=0.043, f_c=3.6e9, feed=(0.01, -0.02, -0.15))


def brute_force_rx(geom, schedule, direction, path_loss=True):
    """Per-element, per-tick field sum written straight from the far-field model."""
    K = 2 * math.pi * geom.f_c / 299792458.0
    r = feed_distances(geom)
    out = []
    for t in range(schedule.n_ticks):
        phi = schedule.frame(t)
        total = 0j
        for m in range(geom.M):
            for n in range(geom.N):
                amp = r.min() / r[m, n] if path_loss else 1.0
                xm = (m + 1 - (geom.M + 1) / 2) * geom.d
                yn = (n + 1 - (geom.N + 1) / 2) * geom.d
                geo = math.sin(direction.theta) * (xm * math.cos(direction.phi) + yn * math.sin(direction.phi))
                total += amp * np.exp(1j * K * r[m, n]) * np.exp(1j * math.pi * phi[m, n]) * np.exp(-1j * K * geo)
        out.append(total)
    return np.array(out)


@pytest.mark.parametrize("path_loss", [True, False])
def test_synthesis_matches_brute_force(path_loss):
    d = Direction.from_degrees(25, 40)
    tc = symbols_to_timecode(qam_map(np.array([1, 0, 0, 1, 1, 1, 0, 0]), 16), 1.0, control_clock=8)
    sched = joint_code(space_coding(SMALL, d), tc)
    got = synthesize_rx(SMALL, sched, d, path_loss=path_loss, chunk=5).samples
    np.testing.assert_allclose(got, brute_force_rx(SMALL, sched, d, path_loss), rtol=1e-12, atol=1e-12)


@given(
    st.lists(st.complex_numbers(max_magnitude=1.0), min_size=1, max_size=6),
    st.floats(0.0, 60.0),
    st.floats(0.0, 359.0),
)
def test_joint_waveform_is_scaled_time_only_waveform(symbols, theta, phi):
    d = Direction.from_degrees(theta, phi)
    tc = symbols_to_timecode(symbols, 1.0, control_clock=10)
    a = synthesize_rx(SMALL, joint_code(SpaceCoding.zeros(SMALL), tc), d).samples
    b = synthesize_rx(SMALL, joint_code(space_coding(SMALL, d), tc), d).samples
    g = np.vdot(a, b) / np.vdot(a, a)
    assert np.linalg.norm(b - g * a) <= 1e-9 * np.linalg.norm(b)
    assert 10 * math.log10(abs(g) ** 2) == pytest.approx(beamforming_gain(SMALL, d), abs=1e-9)


def test_inverted_space_coding_flips_sign():
    d = Direction.from_degrees(10, 0)
    tc = symbols_to_timecode([1, 1j], 1.0, control_clock=8)
    sc = space_coding(SMALL, d)
    a = synthesize_rx(SMALL, joint_code(sc, tc), d).samples
    b = synthesize_rx(SMALL, joint_code(sc.inverted(), tc), d).samples
    np.testing.assert_allclose(a, -b, atol=1e-12)


def test_sample_rate_handling():
    tc = symbols_to_timecode([1, -1], 1e-5, control_clock=200)
    sched = joint_code(SpaceCoding.zeros(SMALL), tc)
    w = synthesize_rx(SMALL, sched, Direction(0.0), sample_rate=40e6)
    assert len(w) == 800 and w.sample_rate == 40e6
    np.testing.assert_array_equal(w.samples[0::2], w.samples[1::2])
    with pytest.raises(ConfigurationError) as err:
        synthesize_rx(SMALL, sched, Direction(0.0), sample_rate=30e6)
    assert err.value.key == "sample_rate"
    with pytest.raises(UsageError):
        synthesize_rx(ArrayGeometry(M=2, N=2), sched, Direction(0.0))


def test_reference_power_is_time_only_power():
    tc = symbols_to_timecode(qam_map(np.zeros(16, dtype=np.uint8), 16), 1.0, control_clock=20)
    d = Direction.from_degrees(30, 0)
    direct = synthesize_rx(SMALL, joint_code(SpaceCoding.zeros(SMALL), tc), d).mean_power()
    assert reference_power(SMALL, d, tc) == pytest.approx(direct)


def test_awgn_power_and_determinism():
    w = IqWaveform(np.ones(200_000), 1.0)
    cfg = ChannelConfig(snr_db=10.0, reference_power=4.0, seed=7)
    a = add_awgn(w, cfg)
    b = add_awgn(w, cfg)
    np.testing.assert_array_equal(a.samples, b.samples)
    noise = a.samples - 1.0
    assert np.mean(np.abs(noise) ** 2) == pytest.approx(0.4, rel=0.02)
    assert np.var(noise.real) == pytest.approx(np.var(noise.imag), rel=0.03)
    clean = add_awgn(w, ChannelConfig(float("inf"), 1.0))
    np.testing.assert_array_equal(clean.samples, w.samples)
    with pytest.raises(UsageError):
        ChannelConfig(10.0, 0.0)


def test_waveform_validation_and_helpers():
    with pytest.raises(UsageError):
        IqWaveform([1, np.nan], 1.0)
    with pytest.raises(UsageError):
        IqWaveform([1], 0.0)
    w = IqWaveform([1, 2], 10.0).prepend([0, 0])
    assert w.t0 == pytest.approx(-0.2)
    np.testing.assert_allclose(w.times, [-0.2, -0.1, 0.0, 0.1])
    assert w.scaled(2j).samples[3] == 4j


def test_spectrum_peaks_at_first_harmonic(tmp_path):
    F_p, fs = 100e3, 20e6
    tc = symbols_to_timecode(np.ones(64), 1 / F_p, control_clock=200)
    w = synthesize_rx(SMALL, joint_code(SpaceCoding.zeros(SMALL), tc), Direction(0.0), sample_rate=fs)
    f, p = power_spectrum(w, nfft=4000)
    # exp(j*pi*g) is real, so the +F_p line has a mirror image at -F_p
    top = np.sort(f[np.argsort(p)[-2:]])
    np.testing.assert_allclose(top, [-F_p, F_p])
    assert p.max() == 0.0
    assert np.all(np.diff(f) > 0)
    # 50 % duty: no carrier and no even harmonics
    assert p[np.argmin(np.abs(f))] < -40
    assert p[np.argmin(np.abs(f - 2 * F_p))] < -40
    write_spectrum_csv(tmp_path / "s.csv", f, p)
    write_waveform_csv(tmp_path / "w.csv", w)
    with open(tmp_path / "s.csv") as fh:
        assert next(csv.reader(fh)) == ["f_offset_hz", "power_db"]
    with open(tmp_path / "w.csv") as fh:
        assert next(csv.reader(fh)) == ["t_s", "I", "Q"]
    with pytest.raises(UsageError):
        power_spectrum(IqWaveform(np.ones(10), 1.0), nfft=64)
