"""Output formats, hashing, and RNG provisioning.

CSV columns are written as shortest round-trip decimals (Python repr).
Wavefunction snapshots are raw little-endian complex64 with a fixed
16-byte header (N, n_spin as uint32; dz, t as float64).  Per-trajectory
RNG streams come from a counter-based Philox generator keyed by
(master seed, trajectory index) through numpy's SeedSequence spawn
mechanism, so ensembles are reproducible and order-independent.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile

import numpy as np

GENERATOR_NAME = "philox4x64/numpy-seedsequence(master, spawn_key=(index,))"

_WF_HEADER = struct.Struct("<IIdd")

OUT_DIR_ENV = "MOLATTICE_OUT"


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible stream for one trajectory."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


def format_float(x) -> str:
    """Shortest decimal that round-trips to the same float64."""
    return repr(float(x))


def write_csv(path, header, columns) -> None:
    """Write named columns (equal-length sequences) as CSV."""
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0])
    if any(len(c) != n for c in columns):
        raise ValueError("csv columns differ in length")
    with atomic_write(path) as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fields = []
            for c in columns:
                v = c[i]
                if np.issubdtype(np.asarray(v).dtype, np.integer):
                    fields.append(str(int(v)))
                else:
                    fields.append(format_float(v))
            fh.write(",".join(fields) + "\n")


def read_csv(path):
    """Read a CSV written by write_csv; returns (header, float array)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


class atomic_write:
    """Context manager writing to a temp file, renamed on success."""

    def __init__(self, path, mode="w"):
        self.path = str(path)
        self.mode = mode

    def __enter__(self):
        d = os.path.dirname(self.path) or "."
        os.makedirs(d, exist_ok=True)
        fd, self.tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
        self.fh = os.fdopen(fd, self.mode)
        return self.fh

    def __exit__(self, exc_type, exc, tb):
        self.fh.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            os.unlink(self.tmp)
        return False


def write_wavefunction(path, psi, t: float = 0.0) -> None:
    """Binary snapshot: header (N, n_spin, dz, t) + complex64 amplitudes."""
    data = np.ascontiguousarray(psi.psi, dtype="<c8")
    with atomic_write(path, "wb") as fh:
        fh.write(_WF_HEADER.pack(psi.n_points, psi.n_spin, psi.dz, t))
        fh.write(data.tobytes())


def read_wavefunction(path):
    """Read a snapshot; returns (grid, psi array, t)."""
    with open(path, "rb") as fh:
        n, n_spin, dz, t = _WF_HEADER.unpack(fh.read(_WF_HEADER.size))
        raw = np.frombuffer(fh.read(), dtype="<c8")
    psi = raw.reshape(n, n_spin).astype(complex)
    grid = np.arange(n) * dz
    return grid, psi, t


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj) -> None:
    with atomic_write(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_out_root() -> str:
    return os.environ.get(OUT_DIR_ENV, "runs")
