"""Flat binary and CSV serialization.

Binary layout ("CVL1"): 4-byte magic, then K, N, q as little-endian unsigned
64-bit integers, then the time stamp as a little-endian float64, then K*N*q
row-major float64 values.  Ensembles store their (K, N, q) samples directly;
covariance matrices reuse the same container as (qN, qN, 1).

All text output is deterministic: floats are written with shortest
round-trip repr, so identical data produces byte-identical files.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .integrator import EnsembleState
from .lattice import BlockCovariance

MAGIC = b"CVL1"
_HEADER = struct.Struct("<4sQQQd")


class FormatError(ValueError):
    """The file does not follow the documented layout."""


def _fmt(x) -> str:
    return repr(float(x))


def write_array(path, array: np.ndarray, time: float) -> None:
    """Write a 3-d float array with a time stamp in the CVL1 layout."""
    array = np.ascontiguousarray(array, dtype="<f8")
    if array.ndim != 3:
        raise FormatError(f"CVL1 stores 3-d arrays, got shape {array.shape}")
    k, n, q = array.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, k, n, q, float(time)))
        fh.write(array.tobytes())


def read_array(path) -> tuple[np.ndarray, float]:
    """Read a CVL1 file back as ((K, N, q) array, time)."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, k, n, q, time = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 8 * k * n * q
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(k, n, q)
    return data.copy(), time


def write_ensemble(path, ensemble: EnsembleState) -> None:
    write_array(path, ensemble.samples, ensemble.time)


def read_ensemble(path) -> tuple[np.ndarray, float]:
    return read_array(path)


def write_covariance(path, cov: BlockCovariance, time: float = 0.0) -> None:
    d = cov.n_blocks * cov.block_dim
    write_array(path, cov.data.reshape(d, d, 1), time)


def read_covariance(path, block_dim: int = 1) -> tuple[BlockCovariance, float]:
    data, time = read_array(path)
    k, n, q = data.shape
    if q != 1 or k != n:
        raise FormatError(f"{path}: not a covariance container, shape {data.shape}")
    if k % block_dim:
        raise FormatError(f"{path}: dimension {k} is not a multiple of block_dim {block_dim}")
    return BlockCovariance(data[:, :, 0], k // block_dim, block_dim), time


def write_csv(path, header: list[str], rows) -> None:
    """CSV with a header row and deterministic float formatting."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [_fmt(x) if isinstance(x, (float, np.floating)) else x for x in row]
            )


def write_ensemble_csv(path, ensemble: EnsembleState) -> None:
    """Columns: sample, block, component, value (1-based indices)."""
    k, n, q = ensemble.samples.shape

    def rows():
        for j in range(k):
            for i in range(n):
                for c in range(q):
                    yield (j + 1, i + 1, c + 1, ensemble.samples[j, i, c])

    write_csv(path, ["sample", "block", "component", "value"], rows())


def write_covariance_csv(path, cov: BlockCovariance) -> None:
    """Columns: row, col, value (1-based scalar indices)."""
    d = cov.n_blocks * cov.block_dim

    def rows():
        for r in range(d):
            for c in range(d):
                yield (r + 1, c + 1, cov.data[r, c])

    write_csv(path, ["row", "col", "value"], rows())


def read_covariance_csv(path, block_dim: int = 1) -> BlockCovariance:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["row", "col", "value"]:
            raise FormatError(f"{path}: expected header row,col,value, got {header}")
        entries = [(int(r), int(c), float(v)) for r, c, v in reader]
    if not entries:
        raise FormatError(f"{path}: no entries")
    d = max(max(r, c) for r, c, _ in entries)
    data = np.zeros((d, d))
    for r, c, v in entries:
        data[r - 1, c - 1] = v
    if d % block_dim:
        raise FormatError(f"{path}: dimension {d} is not a multiple of block_dim {block_dim}")
    return BlockCovariance(data, d // block_dim, block_dim)
