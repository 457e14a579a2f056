"""Reader and writer for the RTT binary tensor container.

Layout, all integers little-endian:

    bytes 0..3    magic ``RTPT``
    bytes 4..5    format version, uint16 (currently 1)
    byte  6       element type code, uint8 (1 = IEEE 754 float32)
    byte  7       rank, uint8 (>= 1)
    next 8*rank   dimensions, uint64 each
    rest          row-major float32 payload, exactly prod(dims) values
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FileFormatError

MAGIC = b"RTPT"
VERSION = 1
DTYPE_FLOAT32 = 1

_HEADER = struct.Struct("<4sHBB")


def write_tensor(path, array) -> None:
    """Write ``array`` as float32 to ``path``.  Bits of float32 input
    pass through unchanged."""
    arr = np.ascontiguousarray(np.asarray(array), dtype="<f4")
    if arr.ndim < 1:
        arr = arr.reshape(1)
    dims = struct.pack(f"<{arr.ndim}Q", *arr.shape)
    header = _HEADER.pack(MAGIC, VERSION, DTYPE_FLOAT32, arr.ndim)
    Path(path).write_bytes(header + dims + arr.tobytes(order="C"))


def read_tensor(path) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor`.

    Raises FileFormatError on any structural problem: bad magic, an
    unknown version or element type, rank 0, a truncated header, or a
    payload whose length disagrees with the dimensions.
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FileFormatError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, dtype_code, ndim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FileFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")
    if dtype_code != DTYPE_FLOAT32:
        raise FileFormatError(f"{path}: unsupported element type code {dtype_code}")
    if ndim < 1:
        raise FileFormatError(f"{path}: rank must be >= 1")
    dims_end = _HEADER.size + 8 * ndim
    if len(data) < dims_end:
        raise FileFormatError(f"{path}: truncated dimension list")
    dims = struct.unpack_from(f"<{ndim}Q", data, _HEADER.size)
    count = 1
    for dim in dims:
        count *= dim
    expected = dims_end + 4 * count
    if len(data) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(data) - dims_end} bytes, expected {4 * count}"
        )
    flat = np.frombuffer(data, dtype="<f4", count=count, offset=dims_end)
    return flat.reshape(dims).astype(np.float32)
