"""Versioned little-endian binary records for trained models.

Layout (all little-endian):
    magic   4 bytes  b"HRLD"
    version u16      currently 1
    F       u32      feature length (columns of the weight matrix)
    flags   u8       0 = raw float64 payload, 1 = min-max quantized payload
    payload          see below

Raw payload: the weight rows then the bias as IEEE-754 float64.
Quantized payload: w_min f64, w_max f64, then one u8 code per weight
and bias entry.  Files are bit-exact across platforms.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import HeraldError

MAGIC = b"HRLD"
VERSION = 1
FLAG_RAW = 0
FLAG_QUANTIZED = 1


class FormatError(HeraldError):
    """The byte stream is not a valid model record."""


def write_header(f: int, flags: int) -> bytes:
    return MAGIC + struct.pack("<HIB", VERSION, f, flags)


def read_header(data: bytes) -> tuple[int, int, int]:
    """Returns (feature_length, flags, payload_offset)."""
    header = struct.Struct("<HIB")
    if len(data) < 4 + header.size or data[:4] != MAGIC:
        raise FormatError("bad magic")
    version, f, flags = header.unpack_from(data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if flags not in (FLAG_RAW, FLAG_QUANTIZED):
        raise FormatError(f"unknown flags {flags}")
    return f, flags, 4 + header.size


def pack_raw(rows: int, f: int, weights: np.ndarray, bias: np.ndarray) -> bytes:
    body = write_header(f, FLAG_RAW)
    flat = np.concatenate([weights.reshape(-1), bias.reshape(-1)])
    return body + struct.pack(f"<{rows * f + rows}d", *flat.tolist())


def unpack_raw(data: bytes, rows: int) -> tuple[np.ndarray, np.ndarray]:
    f, flags, offset = read_header(data)
    if flags != FLAG_RAW:
        raise FormatError("expected a raw payload")
    count = rows * f + rows
    expected = offset + 8 * count
    if len(data) != expected:
        raise FormatError(f"expected {expected} bytes, got {len(data)}")
    flat = np.array(struct.unpack_from(f"<{count}d", data, offset))
    return flat[:rows * f].reshape(rows, f), flat[rows * f:]


def pack_quantized(rows: int, f: int, w_min: float, w_max: float,
                   codes: np.ndarray) -> bytes:
    body = write_header(f, FLAG_QUANTIZED)
    body += struct.pack("<2d", w_min, w_max)
    return body + codes.astype(np.uint8).tobytes()


def unpack_quantized(data: bytes, rows: int) -> tuple[float, float, np.ndarray]:
    f, flags, offset = read_header(data)
    if flags != FLAG_QUANTIZED:
        raise FormatError("expected a quantized payload")
    w_min, w_max = struct.unpack_from("<2d", data, offset)
    offset += 16
    count = rows * f + rows
    if len(data) != offset + count:
        raise FormatError("quantized payload has the wrong length")
    codes = np.frombuffer(data, dtype=np.uint8, offset=offset).copy()
    return w_min, w_max, codes


def feature_length(data: bytes) -> int:
    return read_header(data)[0]
