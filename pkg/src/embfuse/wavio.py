"""Minimal 16-bit PCM mono WAV reading and writing via the stdlib."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .synth import AudioClip


def write_wav(path, samples, sample_rate_hz: int) -> None:
    """Write float samples in [-1, 1] as 16-bit PCM mono."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("samples must be a non-empty 1-d array")
    if not np.all(np.isfinite(arr)) or float(np.max(np.abs(arr))) > 1.0:
        raise ValidationError("samples must be finite and within [-1, 1]")
    pcm = np.clip(np.rint(arr * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(int(sample_rate_hz))
        fh.writeframes(pcm.tobytes())


def read_wav(path) -> AudioClip:
    """Read a 16-bit PCM mono WAV into an AudioClip (samples scaled by 1/32768)."""
    path = Path(path)
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1:
            raise ValidationError(f"{path}: expected mono audio, got {fh.getnchannels()} channels")
        if fh.getsampwidth() != 2:
            raise ValidationError(f"{path}: expected 16-bit PCM, got {8 * fh.getsampwidth()}-bit")
        rate = fh.getframerate()
        frames = fh.readframes(fh.getnframes())
    pcm = np.frombuffer(frames, dtype="<i2")
    if pcm.size < 1:
        raise ValidationError(f"{path}: empty audio")
    return AudioClip((pcm.astype(np.float32) / 32768.0), rate)
