import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsflow.grid import ModelParams, ScalarField, State, make_grid
from epsflow.initial import ICSpec, make_ic
from epsflow.snapshot import (ChecksumError, SnapshotError, TruncatedError, VersionError, decode, encode,
                              load_snapshot, read_snapshot, write_snapshot)


def _random_state(seed, n=17, m=8):
    g = make_grid(n, m, 8.0, 8.0)
    rng = np.random.default_rng(seed)
    u, w = rng.normal(size=(2, n, m))
    s = make_ic(ICSpec(amplitude=0.0), g)
    return State(ScalarField(g, u), ScalarField(g, w), s.phi1, float(rng.uniform(0, 5)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1.99), st.floats(0, 5))
def test_round_trip_bit_exact(seed, eps, nu):
    s = _random_state(seed)
    snap = decode(encode(s, ModelParams(eps, nu), step=7))
    assert snap.state.u1.values.tobytes() == s.u1.values.tobytes()
    assert snap.state.omega1.values.tobytes() == s.omega1.values.tobytes()
    assert snap.state.t == s.t and snap.step == 7
    assert snap.params == ModelParams(eps, nu)


def test_file_round_trip_resolves_phi(tmp_path):
    g = make_grid(33, 32, 8.0, 8.0)
    s = make_ic(ICSpec("dipole", amplitude=1.0), g)
    write_snapshot(s, tmp_path / "a.epsf", ModelParams(1.0, 0.2))
    back = read_snapshot(tmp_path / "a.epsf")
    np.testing.assert_array_equal(back.phi1.values, s.phi1.values)
    assert load_snapshot(tmp_path / "a.epsf").params == ModelParams(1.0, 0.2)


def test_layout_header_and_row_major():
    s = _random_state(1, n=5, m=4)
    data = encode(s, ModelParams())
    assert data[:4] == b"EPSF"
    assert struct.unpack_from("<I", data, 4)[0] == 1
    payload_start = len(data) - 4 - 2 * 5 * 4 * 8
    first = struct.unpack_from("<5d", data, payload_start)
    # r outer, z inner: the first Nz values are row r = 0
    np.testing.assert_array_equal(first[:4], s.u1.values[0])
    assert first[4] == s.u1.values[1, 0]


def test_corrupted_byte_detected():
    data = bytearray(encode(_random_state(2), ModelParams()))
    data[100] ^= 0x01
    with pytest.raises(ChecksumError):
        decode(bytes(data))


def test_version_bump_detected():
    data = bytearray(encode(_random_state(3), ModelParams()))
    struct.pack_into("<I", data, 4, 2)
    with pytest.raises(VersionError):
        decode(bytes(data))


def test_truncated_and_bad_magic():
    data = encode(_random_state(4), ModelParams())
    with pytest.raises(TruncatedError):
        decode(data[:-9])
    with pytest.raises(TruncatedError):
        decode(data[:10])
    with pytest.raises(SnapshotError):
        decode(b"XXXX" + data[4:])
