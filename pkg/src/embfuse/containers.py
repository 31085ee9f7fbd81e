"""Immutable containers for layer stacks, embedding sequences, and scene vectors.

All tensor data is held as read-only float32 arrays; arithmetic on them
accumulates in float64 and emits float32 again (see :mod:`embfuse.ops`).
Instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError
from .validation import as_float_matrix, as_float_vector, check_timing


@dataclass(frozen=True, eq=False)
class LayerStack:
    """The per-layer hidden-state matrices of one extractor for one clip.

    Every layer is a T x C matrix on the same frame grid. ``frame_rate_hz``
    and ``t_start_s`` describe the frame centers: row ``i`` sits at
    ``t_start_s + i / frame_rate_hz`` seconds.
    """

    layers: tuple[np.ndarray, ...]
    frame_rate_hz: float
    t_start_s: float

    def __post_init__(self):
        raw = list(self.layers)
        if len(raw) < 1:
            raise ValidationError("LayerStack requires at least one layer")
        mats = tuple(as_float_matrix(m, f"layer {i}") for i, m in enumerate(raw))
        shape = mats[0].shape
        for i, m in enumerate(mats):
            if m.shape != shape:
                raise ShapeError(
                    f"layer {i} has shape {m.shape}, expected {shape} from layer 0"
                )
        check_timing(self.frame_rate_hz, self.t_start_s)
        object.__setattr__(self, "layers", mats)
        object.__setattr__(self, "frame_rate_hz", float(self.frame_rate_hz))
        object.__setattr__(self, "t_start_s", float(self.t_start_s))

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    @property
    def frame_count(self) -> int:
        return self.layers[0].shape[0]

    @property
    def channel_count(self) -> int:
        return self.layers[0].shape[1]

    def as_array(self) -> np.ndarray:
        """Stack layers into an (L, T, C) float32 array (copy)."""
        return np.stack(self.layers, axis=0)


@dataclass(frozen=True, eq=False)
class EmbeddingSequence:
    """One T x C feature matrix with explicit frame timing."""

    data: np.ndarray
    frame_rate_hz: float
    t_start_s: float

    def __post_init__(self):
        mat = as_float_matrix(self.data, "data")
        check_timing(self.frame_rate_hz, self.t_start_s)
        object.__setattr__(self, "data", mat)
        object.__setattr__(self, "frame_rate_hz", float(self.frame_rate_hz))
        object.__setattr__(self, "t_start_s", float(self.t_start_s))

    @property
    def frame_count(self) -> int:
        return self.data.shape[0]

    @property
    def channel_count(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def frame_times(self) -> np.ndarray:
        """Center time in seconds of every frame: t_start_s + i / frame_rate_hz."""
        return self.t_start_s + np.arange(self.frame_count, dtype=np.float64) / self.frame_rate_hz

    def with_timing(self, frame_rate_hz: float, t_start_s: float) -> "EmbeddingSequence":
        """Same data on a different frame grid."""
        return EmbeddingSequence(self.data, frame_rate_hz, t_start_s)


@dataclass(frozen=True, eq=False)
class SceneVector:
    """A single fixed-length vector summarizing a whole clip."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", as_float_vector(self.values, "values"))

    @property
    def length(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.length
