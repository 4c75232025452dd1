import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risdm.array import ArrayGeometry, Direction
from risdm.coding import space_coding
from risdm.errors import ConfigurationError, ScheduleParseError
from risdm.schedule import MAGIC, ScheduleHeader, check_schedule, encode_payload, read_schedule, write_schedule

GEOM = ArrayGeometry(M=4, N=5)
DIR = Direction.from_degrees(30, 0)
T_P = 1e-5


def make(path, bits, order=16, clock=40, repeat=1, geom=GEOM):
    sched = encode_payload(geom, DIR, bits, order, T_P, clock, repeat)
    header = ScheduleHeader(geom, DIR, T_P, clock, repeat, order, len(bits), sched.n_ticks)
    return write_schedule(path, sched, header), sched


def lines(path):
    return path.read_text().splitlines()


@settings(max_examples=30)
@given(st.sampled_from([4, 16, 64]), st.integers(0, 12), st.integers(1, 2), st.data())
def test_round_trip(tmp_path_factory, order, n_sym, repeat, data):
    k = {4: 2, 16: 4, 64: 6}[order]
    bits = data.draw(st.lists(st.integers(0, 1), min_size=n_sym * k, max_size=n_sym * k))
    path, _ = make(tmp_path_factory.mktemp("s") / "s.txt", bits, order, repeat=repeat)
    res = check_schedule(path)
    assert res.ok, res.mismatches
    assert res.payload.tolist() == bits


def test_52_bit_payload_layout(tmp_path):
    bits = np.random.default_rng(0).integers(0, 2, 52)
    path, sched = make(tmp_path / "s.txt", bits, clock=200, geom=ArrayGeometry())
    header, frames = read_schedule(path)
    assert header.ticks == (13 + 13) * 200
    np.testing.assert_array_equal(frames, sched.frames)
    assert lines(path)[0] == MAGIC


def test_empty_payload_is_sync_only(tmp_path):
    path, sched = make(tmp_path / "s.txt", [])
    assert sched.n_ticks == 13 * 40
    res = check_schedule(path)
    assert res.ok and res.payload.size == 0


def test_every_tick_is_space_code_xor_time_code(tmp_path):
    path, sched = make(tmp_path / "s.txt", [1, 0, 1, 1])
    _, frames = read_schedule(path)
    gamma = space_coding(GEOM, DIR).bits
    for f in frames:
        assert np.array_equal(f, gamma) or np.array_equal(f, 1 - gamma)


def tamper(path, data_line, col):
    text = lines(path)
    at = text.index("data") + 1 + data_line
    row = list(text[at])
    row[col] = "1" if row[col] == "0" else "0"
    text[at] = "".join(row)
    path.write_text("\n".join(text) + "\n")


def test_single_element_tamper_is_located(tmp_path):
    path, _ = make(tmp_path / "s.txt", [0, 1, 1, 0, 1, 1, 1, 1])
    tamper(path, 13 * 40 + 40 + 3, 7)
    res = check_schedule(path)
    assert not res.ok
    m = res.mismatches[0]
    assert (m.tick, m.symbol, m.payload_symbol, m.kind) == (13 * 40 + 40 + 3, 14, 1, "element-mismatch")
    assert "payload symbol 1" in str(m)


def test_whole_tick_tamper_breaks_slot(tmp_path):
    path, _ = make(tmp_path / "s.txt", [0, 1, 1, 0, 1, 1, 1, 1])
    for col in range(20):
        tamper(path, 13 * 40 + 5, col)
    res = check_schedule(path)
    kinds = {(m.symbol, m.kind) for m in res.mismatches}
    assert kinds & {(13, "slot-shape"), (13, "slot-mismatch")}


def test_sync_tamper_is_reported_as_sync(tmp_path):
    path, _ = make(tmp_path / "s.txt", [0, 1, 1, 0])
    for col in range(20):
        tamper(path, 2 * 40 + 4, col)
    res = check_schedule(path)
    assert res.mismatches and all(m.payload_symbol is None for m in res.mismatches)


@pytest.mark.parametrize(
    "edit,line",
    [
        (lambda t: ["# something else"] + t[1:], 1),
        (lambda t: t[:3] + ["M 4"] + t[3:], 4),
        (lambda t: [x if not x.startswith("d ") else "d abc" for x in t], 4),
        (lambda t: t[:2] + ["colour blue"] + t[2:], 3),
        (lambda t: [x for x in t if x != "data"], None),
    ],
)
def test_malformed_header_reports_line(tmp_path, edit, line):
    path, _ = make(tmp_path / "s.txt", [0, 1, 1, 0])
    path.write_text("\n".join(edit(lines(path))) + "\n")
    with pytest.raises(ScheduleParseError) as err:
        read_schedule(path)
    assert err.value.line is not None
    if line is not None:
        assert err.value.line == line
    assert str(err.value).startswith(f"line {err.value.line}:")


def test_coarse_clock_is_rejected(tmp_path):
    with pytest.raises(ConfigurationError) as err:
        make(tmp_path / "s.txt", [0] * 6, order=64, clock=20)
    assert err.value.key == "control_clock"


def test_bad_rows_and_counts(tmp_path):
    path, _ = make(tmp_path / "s.txt", [0, 1, 1, 0])
    text = lines(path)
    path.write_text("\n".join(text[:-1]) + "\n")
    with pytest.raises(ScheduleParseError, match="ticks"):
        read_schedule(path)
    text[-1] = text[-1][:-1] + "2"
    path.write_text("\n".join(text) + "\n")
    with pytest.raises(ScheduleParseError) as err:
        read_schedule(path)
    assert err.value.line == len(text)
