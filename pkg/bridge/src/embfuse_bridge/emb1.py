"""Standalone EMB1 writer.

The bridge talks to the evaluation harness purely through this on-disk
format, so the byte layout is implemented here against its documented
contract rather than imported:

    offset  size  field
    0       4     magic "EMB1"
    4       1     version (1)
    5       1     dtype code (1 = 32-bit float)
    6       2     reserved, zero
    8       4     layer count L (uint32)
    12      4     frame count T (uint32)
    16      4     channel count C (uint32)
    20      8     frame_rate_hz (float64)
    28      8     t_start_s (float64)
    36      ...   L*T*C float32 values, layer-major then row-major
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<4sBBHIIIdd")


def emb1_bytes(cube: np.ndarray, frame_rate_hz: float, t_start_s: float) -> bytes:
    """Serialize an (L, T, C) array of finite floats to canonical EMB1 bytes."""
    cube = np.asarray(cube, dtype=np.float32)
    if cube.ndim != 3 or min(cube.shape) < 1:
        raise ValueError(f"expected a non-empty (L, T, C) array, got shape {cube.shape}")
    if not np.all(np.isfinite(cube)):
        raise ValueError("hidden states contain non-finite values")
    if not frame_rate_hz > 0.0:
        raise ValueError(f"frame_rate_hz must be positive, got {frame_rate_hz}")
    if not t_start_s >= 0.0:
        raise ValueError(f"t_start_s must be non-negative, got {t_start_s}")
    l, t, c = cube.shape
    header = _HEADER.pack(
        MAGIC, VERSION, DTYPE_FLOAT32, 0, l, t, c, float(frame_rate_hz), float(t_start_s)
    )
    return header + np.ascontiguousarray(cube, dtype="<f4").tobytes()


def write_emb1(path, cube: np.ndarray, frame_rate_hz: float, t_start_s: float) -> None:
    Path(path).write_bytes(emb1_bytes(cube, frame_rate_hz, t_start_s))
