"""Exporters that turn pretrained speech/pitch model activations into EMB1 stores."""

from .emb1 import emb1_bytes, write_emb1
from .export import ExportJob, export_hidden_states, linear_resample, read_wav_mono
from .models import (
    MODEL_NAMES,
    STACK_CHECKPOINTS,
    ModelLoadError,
    StackModel,
    conv_frame_timing,
    load_model,
    load_stack_model,
)

__version__ = "0.1.0"

__all__ = [
    "ExportJob",
    "MODEL_NAMES",
    "ModelLoadError",
    "STACK_CHECKPOINTS",
    "StackModel",
    "conv_frame_timing",
    "emb1_bytes",
    "export_hidden_states",
    "linear_resample",
    "load_model",
    "load_stack_model",
    "read_wav_mono",
    "write_emb1",
]
