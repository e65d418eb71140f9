"""Binary checkpoint files.

Layout (little-endian)::

    b"EPSF"  u32 version
    u32 Nr   u32 Nz   u64 step
    f64 R    f64 Lz   f64 epsilon   f64 nu   f64 t
    payload: u1 then omega1, Nr*Nz f64 each, r outer / z inner
    u32 CRC-32 of the payload

phi1 is not stored; it is re-solved on load.
"""
from __future__ import annotations

import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .elliptic import solve_phi
from .grid import GridSpec, ModelParams, ScalarField, State

MAGIC = b"EPSF"
VERSION = 1
_HEAD = struct.Struct("<4sIIIQ5d")


class SnapshotError(IOError):
    pass


class ChecksumError(SnapshotError):
    pass


class VersionError(SnapshotError):
    pass


class TruncatedError(SnapshotError):
    pass


@dataclass(frozen=True)
class Snapshot:
    state: State
    params: ModelParams
    step: int = 0


def encode(state: State, params: ModelParams, step: int = 0) -> bytes:
    g = state.grid
    head = _HEAD.pack(MAGIC, VERSION, g.Nr, g.Nz, step, g.R, g.Lz,
                      params.epsilon, params.nu, state.t)
    payload = (np.ascontiguousarray(state.u1.values, dtype="<f8").tobytes()
               + np.ascontiguousarray(state.omega1.values, dtype="<f8").tobytes())
    return head + payload + struct.pack("<I", zlib.crc32(payload))


def decode(data: bytes) -> Snapshot:
    if len(data) < _HEAD.size:
        raise TruncatedError(f"snapshot shorter than its header ({len(data)} bytes)")
    magic, version, Nr, Nz, step, R, Lz, eps, nu, t = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionError(f"snapshot format version {version}, expected {VERSION}")
    n = Nr * Nz * 8
    end = _HEAD.size + 2 * n
    if len(data) < end + 4:
        raise TruncatedError(f"snapshot truncated: {len(data)} of {end + 4} bytes")
    if len(data) > end + 4:
        raise SnapshotError("trailing bytes after checksum")
    payload = data[_HEAD.size:end]
    (crc,) = struct.unpack_from("<I", data, end)
    if zlib.crc32(payload) != crc:
        raise ChecksumError("snapshot checksum mismatch")
    grid = GridSpec(Nr, Nz, R, Lz)
    u1 = np.frombuffer(payload, dtype="<f8", count=Nr * Nz).reshape(Nr, Nz).astype(float)
    w1 = np.frombuffer(payload, dtype="<f8", offset=n).reshape(Nr, Nz).astype(float)
    w1f = ScalarField(grid, w1)
    state = State(ScalarField(grid, u1), w1f, solve_phi(w1f), t)
    return Snapshot(state, ModelParams(eps, nu), step)


def write_snapshot(state: State, path, params: ModelParams = ModelParams(), step: int = 0) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode(state, params, step))
    os.replace(tmp, path)


def load_snapshot(path) -> Snapshot:
    return decode(Path(path).read_bytes())


def read_snapshot(path) -> State:
    return load_snapshot(path).state
