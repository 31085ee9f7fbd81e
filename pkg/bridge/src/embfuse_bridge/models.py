"""Model adapters: pretrained checkpoints -> per-clip hidden-state cubes.

Transformer stack models expose every hidden state (the initial embedding
output plus one per block), so the header layer count is always block count
plus one. Frame timing is derived from the convolutional front end's
kernel/stride configuration, which also holds for small local checkpoints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

TARGET_SAMPLE_RATE = 16000

# registry name -> hub checkpoint; any local save_pretrained directory is
# also accepted in place of a registry name
STACK_CHECKPOINTS = {
    "wav2vec2-base": "facebook/wav2vec2-base",
    "wav2vec2-large": "facebook/wav2vec2-large",
    "hubert-base": "facebook/hubert-base-ls960",
    "hubert-large": "facebook/hubert-large-ll60k",
    "hubert-xlarge": "facebook/hubert-xlarge-ll60k",
}

PITCH_MODEL = "pitch-model"

MODEL_NAMES = tuple(STACK_CHECKPOINTS) + (PITCH_MODEL,)


class ModelLoadError(RuntimeError):
    """The requested model could not be resolved or initialized."""


def conv_frame_timing(kernels, strides, sample_rate_hz: int = TARGET_SAMPLE_RATE):
    """(frame_rate_hz, t_start_s) of a strided conv stack.

    The hop is the product of strides; the first frame is centered on the
    middle of the receptive field.
    """
    receptive = 1
    hop = 1
    for k, s in zip(kernels, strides):
        receptive += (k - 1) * hop
        hop *= s
    frame_rate = sample_rate_hz / hop
    t_start = (receptive - 1) / 2 / sample_rate_hz
    return frame_rate, t_start


@dataclass(frozen=True)
class StackModel:
    """A loaded transformer stack ready to emit hidden states."""

    model: object
    frame_rate_hz: float
    t_start_s: float
    block_count: int
    device: str

    @property
    def layer_count(self) -> int:
        return self.block_count + 1

    def hidden_states(self, samples: np.ndarray) -> np.ndarray:
        """(L, T, C) float32 hidden states for mono 16 kHz samples."""
        x = torch.from_numpy(np.ascontiguousarray(samples, dtype=np.float32))
        x = x.unsqueeze(0).to(self.device)
        with torch.no_grad():
            out = self.model(x, output_hidden_states=True)
        cube = torch.stack([h[0] for h in out.hidden_states], dim=0)
        return cube.cpu().numpy().astype(np.float32)


def load_stack_model(name_or_path: str, device: str = "cpu") -> StackModel:
    from transformers import AutoModel

    source = STACK_CHECKPOINTS.get(name_or_path, name_or_path)
    try:
        model = AutoModel.from_pretrained(source)
    except Exception as exc:
        raise ModelLoadError(f"could not load {name_or_path!r} from {source!r}: {exc}") from exc
    config = model.config
    if not hasattr(config, "conv_kernel") or not hasattr(config, "conv_stride"):
        raise ModelLoadError(
            f"{name_or_path!r} has no convolutional front end; expected a "
            "wav2vec2/hubert style checkpoint"
        )
    frame_rate, t_start = conv_frame_timing(config.conv_kernel, config.conv_stride)
    model = model.to(device).eval()
    return StackModel(
        model=model,
        frame_rate_hz=frame_rate,
        t_start_s=t_start,
        block_count=int(config.num_hidden_layers),
        device=device,
    )


@dataclass(frozen=True)
class PitchEmbeddingModel:
    """CNN pitch model; exports the fifth max-pooling layer's activations
    as a single-layer stack on a uniform 100 Hz grid."""

    model: object
    device: str
    frame_rate_hz: float = 100.0
    t_start_s: float = 0.0
    layer_count: int = 1

    def hidden_states(self, samples: np.ndarray) -> np.ndarray:
        import torchcrepe

        hop = TARGET_SAMPLE_RATE // int(self.frame_rate_hz)
        x = torch.from_numpy(np.ascontiguousarray(samples, dtype=np.float32))
        frames = torchcrepe.preprocess(
            x.unsqueeze(0), TARGET_SAMPLE_RATE, hop_length=hop, device=self.device
        )
        captured = []

        def grab(_module, _inputs, output):
            captured.append(output)

        # the fifth of the six conv blocks; its max-pool output is the
        # designated embedding
        handle = self.model.conv5_BN.register_forward_hook(grab)
        try:
            with torch.no_grad():
                for chunk in frames:
                    captured.clear()
                    self.model(chunk)
                    break
        finally:
            handle.remove()
        feats = captured[0]
        feats = torch.nn.functional.max_pool2d(feats, (2, 1))
        feats = feats.reshape(feats.shape[0], -1)
        return feats.unsqueeze(0).cpu().numpy().astype(np.float32)


def load_pitch_model(device: str = "cpu") -> PitchEmbeddingModel:
    try:
        import torchcrepe
    except ImportError as exc:
        raise ModelLoadError(
            "pitch-model requires the optional torchcrepe package "
            "(pip install embfuse-bridge[pitch])"
        ) from exc
    model = torchcrepe.Crepe("full")
    torchcrepe.load.model(device, "full")
    return PitchEmbeddingModel(model=torchcrepe.infer.model, device=device)


def load_model(name_or_path: str, device: str = "cpu"):
    if name_or_path == PITCH_MODEL:
        return load_pitch_model(device)
    return load_stack_model(name_or_path, device)
