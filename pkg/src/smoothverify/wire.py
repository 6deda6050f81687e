"""Bit-exact message encodings shared by prover and verifier.

Utilities travel as indices on the quantization grid with step eps/64, packed
big-endian at a fixed per-entry width. Every message on the wire is framed
with a 4-byte big-endian length prefix; byte accounting counts framed sizes.
The full layout is documented in docs/wire-format.md.
"""

from __future__ import annotations

import struct

import numpy as np


def grid_step(eps: float) -> float:
    return eps / 64.0


def grid_max_index(eps: float) -> int:
    # Index of the grid point representing 1.0 (decoded values clamp to 1).
    return int(np.floor(1.0 / grid_step(eps) + 0.5))


def entry_bits(eps: float) -> int:
    levels = grid_max_index(eps) + 1
    return max(1, int(levels - 1).bit_length())


def entry_width(eps: float) -> int:
    """Bytes per quantized utility entry."""
    return (entry_bits(eps) + 7) // 8


def quantize(u, eps: float) -> np.ndarray:
    """Nearest grid index (half-up), clipped to the representable range."""
    u = np.asarray(u, dtype=float)
    idx = np.floor(u / grid_step(eps) + 0.5).astype(np.int64)
    return np.clip(idx, 0, grid_max_index(eps))


def dequantize(idx, eps: float) -> np.ndarray:
    return np.minimum(1.0, np.asarray(idx, dtype=np.int64) * grid_step(eps))


def snap(u, eps: float) -> np.ndarray:
    """Round onto the grid and decode back; what the verifier sees."""
    return dequantize(quantize(u, eps), eps)


_WIDTH_DTYPE = {1: ">u1", 2: ">u2", 4: ">u4", 8: ">u8"}


def encode_indices(idx: np.ndarray, eps: float) -> bytes:
    w = entry_width(eps)
    if w in _WIDTH_DTYPE:
        return np.ascontiguousarray(idx.astype(_WIDTH_DTYPE[w])).tobytes()
    return b"".join(int(i).to_bytes(w, "big") for i in idx)


def decode_indices(data: bytes, n: int, eps: float) -> np.ndarray:
    w = entry_width(eps)
    if len(data) != n * w:
        raise ValueError(f"expected {n * w} bytes of entries, got {len(data)}")
    if w in _WIDTH_DTYPE:
        return np.frombuffer(data, dtype=_WIDTH_DTYPE[w]).astype(np.int64)
    return np.array([int.from_bytes(data[i * w:(i + 1) * w], "big") for i in range(n)],
                    dtype=np.int64)


def encode_floats(values) -> bytes:
    values = np.asarray(values, dtype=float)
    return struct.pack(f">{values.size}d", *values.ravel())


def decode_floats(data: bytes, n: int) -> np.ndarray:
    if len(data) != 8 * n:
        raise ValueError(f"expected {8 * n} bytes of float entries, got {len(data)}")
    return np.array(struct.unpack(f">{n}d", data))


def encode_uint32(x: int) -> bytes:
    return struct.pack(">I", x)


def decode_uint32(data: bytes) -> int:
    return struct.unpack(">I", data)[0]


def frame(payload: bytes) -> bytes:
    return struct.pack(">I", len(payload)) + payload


def framed_size(payload_len: int) -> int:
    return 4 + payload_len
