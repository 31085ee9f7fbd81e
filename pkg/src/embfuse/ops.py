"""Core tensor operations: layer aggregation, resampling, combination, pooling.

Every function here is pure. Accumulation happens in float64 and results are
emitted as float32, matching the containers' storage dtype.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .containers import EmbeddingSequence, LayerStack, SceneVector
from .errors import ShapeError, ValidationError
from .validation import check_positive_int


def layer_aggregate(stack: LayerStack) -> EmbeddingSequence:
    """Average all layers of a stack into a single T x C sequence.

    Output entry (t, c) is the mean over layers of layer_i[t, c]; timing
    fields are copied unchanged.
    """
    cube = np.stack([m.astype(np.float64) for m in stack.layers], axis=0)
    mean = cube.mean(axis=0)
    return EmbeddingSequence(mean.astype(np.float32), stack.frame_rate_hz, stack.t_start_s)


def last_layer(stack: LayerStack) -> EmbeddingSequence:
    """Take the final layer of a stack, the non-aggregated baseline."""
    return EmbeddingSequence(stack.layers[-1], stack.frame_rate_hz, stack.t_start_s)


def _interp_rows(mat: np.ndarray, target: int) -> np.ndarray:
    """Endpoint-aligned linear interpolation along axis 0 of a float64 matrix.

    Output row j is sampled at source coordinate j * (n - 1) / (target - 1).
    A target of 1 collapses to the column mean; a single source row is
    replicated.
    """
    n = mat.shape[0]
    if target == n:
        return mat
    if target == 1:
        return mat.mean(axis=0, keepdims=True)
    if n == 1:
        return np.repeat(mat, target, axis=0)
    coords = np.arange(target, dtype=np.float64) * (n - 1) / (target - 1)
    lo = np.floor(coords).astype(np.intp)
    lo = np.minimum(lo, n - 2)
    frac = (coords - lo)[:, None]
    return mat[lo] * (1.0 - frac) + mat[lo + 1] * frac


def resample(seq: EmbeddingSequence, t_target: int, c_target: int) -> EmbeddingSequence:
    """Separable endpoint-aligned linear interpolation to (t_target, c_target).

    Interpolates the time axis first, then the feature axis with the same
    rule (the channel index is treated as a coordinate). The frame rate is
    rescaled by t_target / T when both the source and target have more than
    one frame; t_start_s is preserved.
    """
    t_target = check_positive_int(t_target, "t_target")
    c_target = check_positive_int(c_target, "c_target")
    src_t, _ = seq.shape
    data = seq.data.astype(np.float64)
    data = _interp_rows(data, t_target)
    data = _interp_rows(data.T, c_target).T
    rate = seq.frame_rate_hz
    if t_target > 1 and src_t > 1:
        rate = rate * (t_target / src_t)
    return EmbeddingSequence(data.astype(np.float32), rate, seq.t_start_s)


def _check_common_timing(seqs: Sequence[EmbeddingSequence], require_channels: bool) -> None:
    if len(seqs) < 1:
        raise ValidationError("need at least one sequence")
    first = seqs[0]
    for i, s in enumerate(seqs):
        if s.frame_count != first.frame_count:
            raise ShapeError(
                f"member {i} has {s.frame_count} frames, expected {first.frame_count}"
            )
        if require_channels and s.channel_count != first.channel_count:
            raise ShapeError(
                f"member {i} has {s.channel_count} channels, expected {first.channel_count}"
            )
        if s.frame_rate_hz != first.frame_rate_hz or s.t_start_s != first.t_start_s:
            raise ShapeError(f"member {i} timing differs from member 0")


def concat_features(seqs: Sequence[EmbeddingSequence]) -> EmbeddingSequence:
    """Concatenate members along the feature axis.

    All members must share frame count and timing; member m occupies the
    contiguous column slice starting at the sum of preceding widths.
    """
    seqs = list(seqs)
    _check_common_timing(seqs, require_channels=False)
    if len(seqs) == 1:
        return seqs[0]
    data = np.concatenate([s.data for s in seqs], axis=1)
    return EmbeddingSequence(data, seqs[0].frame_rate_hz, seqs[0].t_start_s)


def average_features(seqs: Sequence[EmbeddingSequence]) -> EmbeddingSequence:
    """Elementwise mean across members of identical shape and timing."""
    seqs = list(seqs)
    _check_common_timing(seqs, require_channels=True)
    if len(seqs) == 1:
        return seqs[0]
    cube = np.stack([s.data.astype(np.float64) for s in seqs], axis=0)
    mean = cube.mean(axis=0)
    return EmbeddingSequence(mean.astype(np.float32), seqs[0].frame_rate_hz, seqs[0].t_start_s)


def mean_pool(seq: EmbeddingSequence) -> SceneVector:
    """Mean over the time axis; output length equals the channel count."""
    return SceneVector(seq.data.mean(axis=0, dtype=np.float64).astype(np.float32))


def group_bounds(frame_count: int, k: int) -> list[tuple[int, int]]:
    """Contiguous group boundaries: group g covers rows [g*T//k, (g+1)*T//k)."""
    return [(g * frame_count // k, (g + 1) * frame_count // k) for g in range(k)]


def grouped_pool(seq: EmbeddingSequence, k: int) -> SceneVector:
    """Split the time axis into k contiguous groups, mean-pool each, concatenate.

    Output length is k * C. When k exceeds T some groups are empty; an empty
    group reuses the nearest preceding non-empty group's mean (the nearest
    following one for empty groups before the first non-empty group).
    """
    k = check_positive_int(k, "k")
    t, c = seq.shape
    means: list[np.ndarray | None] = []
    for lo, hi in group_bounds(t, k):
        if hi > lo:
            means.append(seq.data[lo:hi].mean(axis=0, dtype=np.float64).astype(np.float32))
        else:
            means.append(None)
    last = None
    for g in range(k):
        if means[g] is None:
            means[g] = last
        else:
            last = means[g]
    first = next(m for m in means if m is not None)
    filled = [m if m is not None else first for m in means]
    return SceneVector(np.concatenate(filled))
