"""Scoring: accuracy, macro mean average precision, and event-onset F-measure.

``eventize`` turns frame-level class probabilities into discrete labeled
onsets; ``onset_fms`` scores onset lists by greedy one-to-one matching within
a time tolerance. All functions are pure and deterministic, including mAP's
tie handling (ties break by ascending sample index).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import MetricUndefinedError, ValidationError
from .validation import check_positive_int

DEFAULT_ONSET_TOLERANCE_S = 0.05


@dataclass(frozen=True)
class EventizerConfig:
    """Post-processing knobs for frame probabilities -> onsets."""

    threshold: float = 0.5
    min_duration_s: float = 0.06
    median_window: int = 3

    def __post_init__(self):
        if not (0.0 < self.threshold < 1.0):
            raise ValidationError("threshold must lie in (0, 1)")
        if self.min_duration_s < 0.0:
            raise ValidationError("min_duration_s must be >= 0")
        check_positive_int(self.median_window, "median_window")
        if self.median_window % 2 == 0:
            raise ValidationError("median_window must be odd")


@dataclass(frozen=True)
class EventList:
    """Labeled onsets as (time_s, label) pairs, sorted by time."""

    onsets: tuple[tuple[float, int], ...] = ()

    def __post_init__(self):
        cleaned = []
        last_per_label: dict[int, float] = {}
        for time_s, label in self.onsets:
            t = float(time_s)
            lbl = int(label)
            if not np.isfinite(t) or t < 0.0:
                raise ValidationError(f"onset time must be finite and >= 0, got {time_s}")
            if lbl in last_per_label and t < last_per_label[lbl]:
                raise ValidationError(f"onsets for label {lbl} are not sorted")
            last_per_label[lbl] = t
            cleaned.append((t, lbl))
        object.__setattr__(self, "onsets", tuple(cleaned))

    @classmethod
    def from_events(cls, events) -> "EventList":
        """Build from unsorted (time_s, label) pairs."""
        return cls(tuple(sorted(((float(t), int(l)) for t, l in events))))

    def labels(self) -> set[int]:
        return {label for _, label in self.onsets}

    def times_for(self, label: int) -> list[float]:
        return [t for t, l in self.onsets if l == label]

    def __len__(self) -> int:
        return len(self.onsets)


def accuracy(pred, ref) -> float:
    """Fraction of exact matches between two equally long class-id vectors."""
    pred = np.asarray(pred)
    ref = np.asarray(ref)
    if pred.ndim != 1 or ref.ndim != 1 or pred.shape != ref.shape:
        raise ValidationError(f"prediction/reference shapes differ: {pred.shape} vs {ref.shape}")
    if pred.size < 1:
        raise ValidationError("need at least one sample")
    return float(np.mean(pred == ref))


def average_precision(scores, labels) -> float:
    """AP of one class: mean precision at each positive's rank, scores
    descending, ties broken by ascending sample index."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValidationError("scores and labels must be equal-length vectors")
    if not np.any(labels == 1):
        raise MetricUndefinedError("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    hits = (labels[order] == 1).astype(np.float64)
    ranks = np.arange(1, scores.size + 1, dtype=np.float64)
    precision_at = np.cumsum(hits) / ranks
    return float(precision_at[hits == 1].mean())


def mean_average_precision(scores, labels) -> float:
    """Macro mean over classes of :func:`average_precision`.

    Classes without positives are skipped with a warning; if no class has a
    positive the metric is undefined and raises.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 2 or scores.shape != labels.shape:
        raise ValidationError(f"scores/labels shapes differ: {scores.shape} vs {labels.shape}")
    if not np.all(np.isfinite(scores)):
        raise ValidationError("scores contain non-finite values")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValidationError("labels must be binary")
    empty = [k for k in range(labels.shape[1]) if not np.any(labels[:, k] == 1)]
    if len(empty) == labels.shape[1]:
        raise MetricUndefinedError(f"no class has a positive label; empty classes: {empty}")
    if empty:
        warnings.warn(f"classes without positives skipped from mAP: {empty}", stacklevel=2)
    aps = [
        average_precision(scores[:, k], labels[:, k])
        for k in range(labels.shape[1])
        if k not in set(empty)
    ]
    return float(np.mean(aps))


def _median_filter(x: np.ndarray, window: int) -> np.ndarray:
    """Centered running median; the window shrinks at the edges."""
    if window == 1:
        return x
    half = window // 2
    out = np.empty_like(x)
    for i in range(x.size):
        lo = max(0, i - half)
        hi = min(x.size, i + half + 1)
        out[i] = np.median(x[lo:hi])
    return out


def eventize(frame_probs, frame_times, cfg: EventizerConfig) -> EventList:
    """Threshold median-filtered frame probabilities into labeled onsets.

    Per class: frames with filtered probability >= threshold form runs; runs
    whose duration (frame count times the nominal frame spacing) falls short
    of min_duration_s are dropped, and each surviving run emits one onset at
    its first frame's time.
    """
    probs = np.asarray(frame_probs, dtype=np.float64)
    times = np.asarray(frame_times, dtype=np.float64)
    if probs.ndim != 2:
        raise ValidationError("frame_probs must be T x K")
    if times.ndim != 1 or times.shape[0] != probs.shape[0]:
        raise ValidationError("frame_times must have one entry per frame")
    if not np.all(np.isfinite(probs)) or np.any(probs < 0.0) or np.any(probs > 1.0):
        raise ValidationError("frame probabilities must lie in [0, 1]")
    if not np.all(np.isfinite(times)) or np.any(np.diff(times) <= 0.0):
        raise ValidationError("frame_times must be strictly increasing")
    spacing = float(np.median(np.diff(times))) if times.size > 1 else 0.0
    events = []
    for k in range(probs.shape[1]):
        marked = _median_filter(probs[:, k], cfg.median_window) >= cfg.threshold
        i = 0
        while i < marked.size:
            if not marked[i]:
                i += 1
                continue
            j = i
            while j < marked.size and marked[j]:
                j += 1
            duration = (j - i) * spacing
            if duration >= cfg.min_duration_s - 1e-9:
                events.append((times[i], k))
            i = j
    return EventList.from_events(events)


def onset_match_counts(pred: EventList, ref: EventList, tolerance_s: float) -> tuple[int, int, int]:
    """(matches, predicted count, reference count) under greedy per-label
    matching: predictions in ascending time take the earliest unmatched
    reference within +/- tolerance_s."""
    if tolerance_s <= 0.0:
        raise ValidationError("tolerance_s must be positive")
    matches = 0
    for label in pred.labels() | ref.labels():
        p_times = pred.times_for(label)
        r_times = ref.times_for(label)
        ri = 0
        for p in p_times:
            while ri < len(r_times) and r_times[ri] < p - tolerance_s:
                ri += 1
            if ri < len(r_times) and abs(r_times[ri] - p) <= tolerance_s:
                matches += 1
                ri += 1
    return matches, len(pred), len(ref)


def onset_fms(
    pred: EventList, ref: EventList, tolerance_s: float = DEFAULT_ONSET_TOLERANCE_S
) -> tuple[float, float, float]:
    """(precision, recall, f1) over onsets, micro-aggregated across labels.

    Empty denominators yield 0 unless both lists are empty, which scores a
    perfect (1, 1, 1).
    """
    matches, n_pred, n_ref = onset_match_counts(pred, ref, tolerance_s)
    if n_pred == 0 and n_ref == 0:
        return 1.0, 1.0, 1.0
    precision = matches / n_pred if n_pred else 0.0
    recall = matches / n_ref if n_ref else 0.0
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1
