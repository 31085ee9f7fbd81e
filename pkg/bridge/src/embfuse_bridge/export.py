"""Batch export: run one model over a directory of WAVs, emit EMB1 + index.

The output directory is a ready-to-open embedding store: one
``<model>/<clip>.emb1`` file per clip plus an ``index.json`` in the
harness's documented schema. A ``layer_map.json`` records what each layer
index holds.
"""

from __future__ import annotations

import json
import warnings
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .emb1 import write_emb1
from .models import MODEL_NAMES, TARGET_SAMPLE_RATE, load_model


@dataclass(frozen=True)
class ExportJob:
    model: str
    audio_dir: Path
    out_dir: Path
    device: str = "cpu"

    def __post_init__(self):
        object.__setattr__(self, "audio_dir", Path(self.audio_dir))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not self.audio_dir.is_dir():
            raise ValueError(f"audio directory does not exist: {self.audio_dir}")


def read_wav_mono(path) -> tuple[np.ndarray, int]:
    """16-bit PCM WAV to float32 in [-1, 1]; stereo is downmixed with a warning."""
    with wave.open(str(path), "rb") as fh:
        channels = fh.getnchannels()
        if fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM, got {8 * fh.getsampwidth()}-bit")
        rate = fh.getframerate()
        pcm = np.frombuffer(fh.readframes(fh.getnframes()), dtype="<i2")
    if pcm.size == 0:
        raise ValueError(f"{path}: empty audio")
    samples = pcm.astype(np.float32) / 32768.0
    if channels > 1:
        warnings.warn(f"{path}: downmixing {channels} channels to mono", stacklevel=2)
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def linear_resample(samples: np.ndarray, rate: int, target: int) -> np.ndarray:
    """Endpoint-aligned linear resampling; adequate for feeding extractors."""
    if rate == target:
        return samples
    n_out = max(2, int(round(samples.size * target / rate)))
    src = np.arange(samples.size, dtype=np.float64)
    dst = np.linspace(0.0, samples.size - 1, n_out)
    return np.interp(dst, src, samples.astype(np.float64)).astype(np.float32)


def layer_description(model_name: str, layer_count: int) -> list[str]:
    if layer_count == 1:
        return ["pitch embedding (fifth max-pool output)"]
    return ["initial embedding output"] + [
        f"transformer block {i} output" for i in range(1, layer_count)
    ]


def export_hidden_states(job: ExportJob) -> list[dict]:
    """Export every ``*.wav`` under the job's audio dir; returns index entries."""
    if job.model not in MODEL_NAMES and not Path(job.model).exists():
        raise ValueError(
            f"unknown model {job.model!r}; expected one of {MODEL_NAMES} or a local path"
        )
    wavs = sorted(job.audio_dir.glob("*.wav"))
    if not wavs:
        raise ValueError(f"no .wav files under {job.audio_dir}")
    model = load_model(job.model, job.device)
    model_id = Path(job.model).name if Path(job.model).exists() else job.model
    out_root = job.out_dir
    (out_root / model_id).mkdir(parents=True, exist_ok=True)

    entries = []
    for wav_path in wavs:
        samples, rate = read_wav_mono(wav_path)
        if rate != TARGET_SAMPLE_RATE:
            warnings.warn(
                f"{wav_path}: resampling {rate} Hz -> {TARGET_SAMPLE_RATE} Hz", stacklevel=2
            )
            samples = linear_resample(samples, rate, TARGET_SAMPLE_RATE)
        cube = model.hidden_states(samples)
        rel = f"{model_id}/{wav_path.stem}.emb1"
        write_emb1(out_root / rel, cube, model.frame_rate_hz, model.t_start_s)
        entries.append(
            {
                "extractor_id": model_id,
                "clip_id": wav_path.stem,
                "path": rel,
                "layer_count": int(cube.shape[0]),
                "frame_count": int(cube.shape[1]),
                "channel_count": int(cube.shape[2]),
            }
        )

    index_path = out_root / "index.json"
    existing = []
    if index_path.is_file():
        existing = json.loads(index_path.read_text()).get("entries", [])
        existing = [e for e in existing if e["extractor_id"] != model_id]
    merged = sorted(existing + entries, key=lambda e: (e["extractor_id"], e["clip_id"]))
    index_path.write_text(json.dumps({"version": 1, "entries": merged}, indent=2) + "\n")

    layer_map_path = out_root / "layer_map.json"
    layer_map = {}
    if layer_map_path.is_file():
        layer_map = json.loads(layer_map_path.read_text())
    layer_map[model_id] = layer_description(model_id, int(entries[0]["layer_count"]))
    layer_map_path.write_text(json.dumps(layer_map, indent=2) + "\n")
    return entries
