"""Reader and writer for the EMB1 layer-stack container.

Little-endian layout:

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

Identical stacks serialize to identical bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .containers import LayerStack
from .errors import Emb1CorruptionError, Emb1FormatError

MAGIC = b"EMB1"
VERSION = 1
DTYPE_FLOAT32 = 1
_HEADER = struct.Struct("<4sBBHIIIdd")
HEADER_SIZE = _HEADER.size  # 36


@dataclass(frozen=True)
class Emb1Header:
    layer_count: int
    frame_count: int
    channel_count: int
    frame_rate_hz: float
    t_start_s: float
    version: int = VERSION
    dtype_code: int = DTYPE_FLOAT32

    @property
    def payload_bytes(self) -> int:
        return 4 * self.layer_count * self.frame_count * self.channel_count


def _unpack_header(blob: bytes, source: str) -> Emb1Header:
    if len(blob) < HEADER_SIZE:
        raise Emb1CorruptionError(
            f"{source}: expected at least {HEADER_SIZE} header bytes, found {len(blob)}"
        )
    magic, version, dtype_code, reserved, l, t, c, rate, start = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise Emb1FormatError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise Emb1FormatError(f"{source}: unsupported version {version}")
    if dtype_code != DTYPE_FLOAT32:
        raise Emb1FormatError(f"{source}: unsupported dtype code {dtype_code}")
    if reserved != 0:
        raise Emb1FormatError(f"{source}: reserved bytes must be zero, found {reserved}")
    if min(l, t, c) < 1:
        raise Emb1FormatError(f"{source}: header dims must be >= 1, got L={l} T={t} C={c}")
    if not (np.isfinite(rate) and rate > 0.0):
        raise Emb1FormatError(f"{source}: frame_rate_hz must be positive, got {rate}")
    if not (np.isfinite(start) and start >= 0.0):
        raise Emb1FormatError(f"{source}: t_start_s must be non-negative, got {start}")
    return Emb1Header(l, t, c, rate, start, version, dtype_code)


def read_header(path) -> Emb1Header:
    """Parse and validate the 36-byte header of an EMB1 file."""
    path = Path(path)
    with path.open("rb") as fh:
        blob = fh.read(HEADER_SIZE)
    return _unpack_header(blob, str(path))


def stack_to_bytes(stack: LayerStack) -> bytes:
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        DTYPE_FLOAT32,
        0,
        stack.layer_count,
        stack.frame_count,
        stack.channel_count,
        stack.frame_rate_hz,
        stack.t_start_s,
    )
    payload = np.ascontiguousarray(stack.as_array(), dtype="<f4").tobytes()
    return header + payload


def write_embedding(stack: LayerStack, path) -> None:
    """Serialize a stack to canonical EMB1 bytes at ``path``."""
    Path(path).write_bytes(stack_to_bytes(stack))


def bytes_to_stack(blob: bytes, source: str = "<bytes>") -> LayerStack:
    header = _unpack_header(blob, source)
    payload = blob[HEADER_SIZE:]
    if len(payload) != header.payload_bytes:
        raise Emb1CorruptionError(
            f"{source}: expected {header.payload_bytes} payload bytes, found {len(payload)}"
        )
    cube = np.frombuffer(payload, dtype="<f4").reshape(
        header.layer_count, header.frame_count, header.channel_count
    )
    return LayerStack(tuple(cube), header.frame_rate_hz, header.t_start_s)


def load_embedding(path) -> LayerStack:
    """Read an EMB1 file back into a validated :class:`LayerStack`."""
    path = Path(path)
    return bytes_to_stack(path.read_bytes(), str(path))
