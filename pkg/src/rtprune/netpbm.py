"""Minimal binary netpbm loader: 8-bit PGM (P5) and PPM (P6).

Header tokens may be separated by any whitespace and interleaved with
``#`` comments that run to end of line.  Exactly one whitespace byte
separates the maxval from the pixel payload, and the payload length
must match the declared dimensions exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FileFormatError

_WHITESPACE = b" \t\n\r\x0b\x0c"


def _next_token(data: bytes, pos: int, path) -> tuple[bytes, int]:
    """Next header token starting at ``pos``; skips whitespace and comments."""
    n = len(data)
    while pos < n:
        byte = data[pos : pos + 1]
        if byte == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif byte in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise FileFormatError(f"{path}: truncated header")
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _parse_int(token: bytes, what: str, path) -> int:
    if not token.isdigit():
        raise FileFormatError(f"{path}: bad {what} {token!r}")
    return int(token)


def read_netpbm(path) -> np.ndarray:
    """Load a binary PGM or PPM file.

    Returns uint8 arrays: (H, W) for PGM, (H, W, 3) for PPM.  Only
    maxval 255 is accepted.
    """
    data = Path(path).read_bytes()
    magic, pos = _next_token(data, 0, path)
    if magic not in (b"P5", b"P6"):
        raise FileFormatError(f"{path}: not a binary PGM/PPM file (magic {magic!r})")
    width_tok, pos = _next_token(data, pos, path)
    height_tok, pos = _next_token(data, pos, path)
    maxval_tok, pos = _next_token(data, pos, path)
    width = _parse_int(width_tok, "width", path)
    height = _parse_int(height_tok, "height", path)
    maxval = _parse_int(maxval_tok, "maxval", path)
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: image must be non-empty, got {width} x {height}")
    if maxval != 255:
        raise FileFormatError(f"{path}: only 8-bit images (maxval 255) are supported, got {maxval}")
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise FileFormatError(f"{path}: missing whitespace after maxval")
    pos += 1

    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    payload = data[pos:]
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return pixels.reshape(height, width).copy()
    return pixels.reshape(height, width, 3).copy()


def write_netpbm(path, image) -> None:
    """Write a uint8 grayscale (H, W) or RGB (H, W, 3) image."""
    arr = np.asarray(image)
    if arr.dtype != np.uint8:
        raise FileFormatError(f"image must be uint8, got dtype {arr.dtype}")
    if arr.ndim == 2:
        magic = b"P5"
        height, width = arr.shape
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
        height, width = arr.shape[:2]
    else:
        raise FileFormatError(f"image must be (H, W) or (H, W, 3), got shape {arr.shape}")
    if height < 1 or width < 1:
        raise FileFormatError("image must be non-empty")
    header = b"%s\n%d %d\n255\n" % (magic, width, height)
    Path(path).write_bytes(header + np.ascontiguousarray(arr).tobytes())
