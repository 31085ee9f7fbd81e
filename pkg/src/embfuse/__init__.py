"""embfuse: ensemble fusion of audio embedding stacks plus an evaluation harness.

The core containers and operations live in :mod:`embfuse.containers` and
:mod:`embfuse.ops`; :mod:`embfuse.fusion` combines members into one
representation, :mod:`embfuse.probe` trains shallow downstream classifiers,
:mod:`embfuse.metrics` scores them, and :mod:`embfuse.runner` orchestrates
whole suites from the command line (see :mod:`embfuse.cli`).
"""

from .containers import EmbeddingSequence, LayerStack, SceneVector
from .errors import (
    ConfigError,
    Emb1CorruptionError,
    Emb1FormatError,
    MetricUndefinedError,
    ShapeError,
    ValidationError,
)
from .fusion import FusionConfig, SceneEmbedder, fuse, named_variant, scene_embed
from .metrics import (
    EventizerConfig,
    EventList,
    accuracy,
    average_precision,
    eventize,
    mean_average_precision,
    onset_fms,
)
from .ops import (
    average_features,
    concat_features,
    grouped_pool,
    last_layer,
    layer_aggregate,
    mean_pool,
    resample,
)
from .probe import (
    ProbeConfig,
    ProbeModel,
    ShallowProbe,
    gradient,
    loss,
    predict,
    predict_proba,
    train_probe,
)
from .synth import AudioClip, ExtractorSpec, extract, frame, make_synthetic_task
from .emb1 import load_embedding, read_header, write_embedding
from .manifest import TaskManifest
from .runner import RunReport, run_suite, run_variant
from .store import EmbeddingStore

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "ConfigError",
    "Emb1CorruptionError",
    "Emb1FormatError",
    "EmbeddingSequence",
    "EmbeddingStore",
    "EventList",
    "EventizerConfig",
    "ExtractorSpec",
    "FusionConfig",
    "LayerStack",
    "MetricUndefinedError",
    "ProbeConfig",
    "ProbeModel",
    "RunReport",
    "SceneEmbedder",
    "SceneVector",
    "ShallowProbe",
    "ShapeError",
    "TaskManifest",
    "ValidationError",
    "accuracy",
    "average_features",
    "average_precision",
    "concat_features",
    "eventize",
    "extract",
    "frame",
    "fuse",
    "gradient",
    "grouped_pool",
    "last_layer",
    "layer_aggregate",
    "load_embedding",
    "loss",
    "make_synthetic_task",
    "mean_average_precision",
    "mean_pool",
    "named_variant",
    "onset_fms",
    "predict",
    "predict_proba",
    "read_header",
    "resample",
    "run_suite",
    "run_variant",
    "scene_embed",
    "train_probe",
    "write_embedding",
]
