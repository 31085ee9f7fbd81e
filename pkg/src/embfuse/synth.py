"""Deterministic stand-in extractors with heterogeneous layer/frame/channel shapes.

Three families are provided: a triangular-filterbank spectral front end, a
stack of fixed random tanh projections on top of it, and an
autocorrelation-based pitch salience map. All are pure functions of
(clip, spec), so corpora and embedding stores can be rebuilt bit-identically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .containers import EmbeddingSequence, LayerStack
from .errors import ValidationError
from .ops import resample
from .validation import check_finite, check_positive_int, freeze

EXTRACTOR_KINDS = ("spectral", "projection_stack", "pitch_salience")

# internal band count feeding the projection stack's layer 0
_PROJECTION_BASE_BANDS = 64


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono audio samples in [-1, 1] at an integer sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float32)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("samples must be a non-empty 1-d array")
        check_finite(arr, "samples")
        if float(np.max(np.abs(arr))) > 1.0:
            raise ValidationError("samples must lie within [-1, 1]")
        sr = int(self.sample_rate_hz)
        if sr < 1:
            raise ValidationError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", freeze(np.ascontiguousarray(arr)))
        object.__setattr__(self, "sample_rate_hz", sr)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class ExtractorSpec:
    """Configuration of one synthetic extractor.

    ``layer_count`` only matters for projection stacks; ``band_lo_hz`` /
    ``band_hi_hz`` bound the spectral filterbank (None means Nyquist) and
    ``f0_min_hz`` / ``f0_max_hz`` bound the pitch lag grid.
    """

    id: str
    kind: str
    window_s: float = 0.025
    hop_s: float = 0.010
    channels: int = 32
    layer_count: int = 1
    seed: int = 0
    band_lo_hz: float = 0.0
    band_hi_hz: float | None = None
    f0_min_hz: float = 50.0
    f0_max_hz: float = 2000.0

    def __post_init__(self):
        if self.kind not in EXTRACTOR_KINDS:
            raise ValidationError(f"kind must be one of {EXTRACTOR_KINDS}, got {self.kind!r}")
        if not (0.0 < self.hop_s <= self.window_s):
            raise ValidationError("need 0 < hop_s <= window_s")
        check_positive_int(self.channels, "channels")
        check_positive_int(self.layer_count, "layer_count")
        if self.kind != "projection_stack" and self.layer_count != 1:
            raise ValidationError(f"kind {self.kind!r} is single-layer")
        if not (0.0 < self.f0_min_hz < self.f0_max_hz):
            raise ValidationError("need 0 < f0_min_hz < f0_max_hz")
        if self.band_lo_hz < 0.0:
            raise ValidationError("band_lo_hz must be non-negative")


def frame(clip: AudioClip, window_s: float, hop_s: float) -> np.ndarray:
    """Slice a clip into overlapping frames, shape (T, W).

    W = ceil(window_s * sr), H = ceil(hop_s * sr), T = 1 + (N - W) // H.
    Frame t covers samples [t*H, t*H + W) and is centered at
    t * hop_s + window_s / 2 seconds.
    """
    sr = clip.sample_rate_hz
    w = math.ceil(window_s * sr)
    h = math.ceil(hop_s * sr)
    if w < 1 or h < 1:
        raise ValidationError("window and hop must each cover at least one sample")
    n = clip.samples.size
    if n < w:
        raise ValidationError(f"clip of {n} samples is shorter than one {w}-sample window")
    t = 1 + (n - w) // h
    idx = np.arange(w)[None, :] + h * np.arange(t)[:, None]
    return clip.samples[idx].astype(np.float64)


def frame_timing(window_s: float, hop_s: float) -> tuple[float, float]:
    """(frame_rate_hz, t_start_s) for the frame grid of :func:`frame`."""
    return 1.0 / hop_s, window_s / 2.0


def spectral_band_centers(spec: ExtractorSpec, sample_rate_hz: int) -> np.ndarray:
    """Center frequency in Hz of every filterbank band."""
    hi = spec.band_hi_hz if spec.band_hi_hz is not None else sample_rate_hz / 2.0
    return np.linspace(spec.band_lo_hz, hi, spec.channels + 2)[1:-1]


def _filterbank(n_bins: int, bin_hz: float, lo: float, hi: float, bands: int) -> np.ndarray:
    """Triangular filters (bands, n_bins) with linearly spaced centers."""
    edges = np.linspace(lo, hi, bands + 2)
    freqs = np.arange(n_bins) * bin_hz
    fb = np.zeros((bands, n_bins))
    for b in range(bands):
        e0, e1, e2 = edges[b], edges[b + 1], edges[b + 2]
        rising = (freqs - e0) / (e1 - e0)
        falling = (e2 - freqs) / (e2 - e1)
        fb[b] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def _spectral_matrix(
    clip: AudioClip, window_s: float, hop_s: float, bands: int, lo: float, hi: float | None
) -> np.ndarray:
    """Per-frame log(1 + filterbank @ |DFT|) features, shape (T, bands), float64."""
    frames = frame(clip, window_s, hop_s)
    mag = np.abs(np.fft.rfft(frames, axis=1))
    w = frames.shape[1]
    hi = hi if hi is not None else clip.sample_rate_hz / 2.0
    fb = _filterbank(mag.shape[1], clip.sample_rate_hz / w, lo, hi, bands)
    return np.log1p(mag @ fb.T)


def extract_spectral(clip: AudioClip, spec: ExtractorSpec) -> LayerStack:
    """Single-layer log-filterbank features."""
    if spec.kind != "spectral":
        raise ValidationError(f"spec kind {spec.kind!r} is not spectral")
    feats = _spectral_matrix(
        clip, spec.window_s, spec.hop_s, spec.channels, spec.band_lo_hz, spec.band_hi_hz
    )
    rate, start = frame_timing(spec.window_s, spec.hop_s)
    return LayerStack((feats.astype(np.float32),), rate, start)


_U64 = np.uint64
_MASK64 = (1 << 64) - 1


def _mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays (wrapping is intended)."""
    with np.errstate(over="ignore"):
        z = (z + _U64(0x9E3779B97F4A7C15)).astype(np.uint64)
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))


def _unit_grid(seed: int, layer: int, rows: int, cols: int) -> np.ndarray:
    """Floats in [0, 1) addressed purely by (seed, layer, row, col).

    Counter-based so that a stack prefix never depends on the total layer
    count and results are platform independent.
    """
    key = _mix64(np.asarray(seed & _MASK64, dtype=np.uint64))
    key = _mix64(key ^ _U64(layer + 1))
    row_keys = _mix64(key + np.arange(1, rows + 1, dtype=np.uint64))
    grid = _mix64(row_keys[:, None] + np.arange(1, cols + 1, dtype=np.uint64)[None, :])
    return (grid >> _U64(11)).astype(np.float64) * 2.0**-53


def projection_params(spec: ExtractorSpec, layer: int) -> tuple[np.ndarray, np.ndarray]:
    """Weight matrix (C, C) and bias (C,) of one projection layer."""
    c = spec.channels
    unit = _unit_grid(spec.seed, layer, c + 1, c)
    scale = math.sqrt(3.0 / c)
    weights = (2.0 * unit[:c] - 1.0) * scale
    bias = (2.0 * unit[c] - 1.0) * 0.1
    return weights, bias


def extract_projection_stack(clip: AudioClip, spec: ExtractorSpec) -> LayerStack:
    """Layer 0 is spectral features resampled to C channels; layer i >= 1 is
    tanh(W_i @ layer_{i-1} + b_i) with counter-seeded fixed parameters."""
    if spec.kind != "projection_stack":
        raise ValidationError(f"spec kind {spec.kind!r} is not projection_stack")
    base = _spectral_matrix(
        clip, spec.window_s, spec.hop_s, _PROJECTION_BASE_BANDS, spec.band_lo_hz, spec.band_hi_hz
    )
    rate, start = frame_timing(spec.window_s, spec.hop_s)
    seq = EmbeddingSequence(base.astype(np.float32), rate, start)
    layer0 = resample(seq, base.shape[0], spec.channels).data
    layers = [layer0]
    prev = layer0.astype(np.float64)
    for i in range(1, spec.layer_count):
        weights, bias = projection_params(spec, i)
        prev = np.tanh(prev @ weights.T + bias)
        layers.append(prev.astype(np.float32))
    return LayerStack(tuple(layers), rate, start)


def salience_frequencies(spec: ExtractorSpec) -> np.ndarray:
    """Log-spaced channel frequencies between f0_min_hz and f0_max_hz."""
    return np.geomspace(spec.f0_min_hz, spec.f0_max_hz, spec.channels)


def salience_lags(spec: ExtractorSpec, sample_rate_hz: int) -> np.ndarray:
    """Integer autocorrelation lags, one per channel (ascending frequency)."""
    lags = np.rint(sample_rate_hz / salience_frequencies(spec)).astype(int)
    return np.maximum(lags, 1)


def extract_pitch_salience(clip: AudioClip, spec: ExtractorSpec) -> LayerStack:
    """Normalized autocorrelation per frame at log-spaced lags; 0/0 is 0."""
    if spec.kind != "pitch_salience":
        raise ValidationError(f"spec kind {spec.kind!r} is not pitch_salience")
    frames = frame(clip, spec.window_s, spec.hop_s)
    w = frames.shape[1]
    lags = salience_lags(spec, clip.sample_rate_hz)
    if int(lags.max()) >= w:
        raise ValidationError(
            f"max lag {int(lags.max())} does not fit the {w}-sample window; "
            "raise window_s or f0_min_hz"
        )
    cols = []
    for lag in lags:
        head = frames[:, : w - lag]
        tail = frames[:, lag:]
        num = np.einsum("ij,ij->i", head, tail)
        den = np.sqrt(np.einsum("ij,ij->i", head, head) * np.einsum("ij,ij->i", tail, tail))
        r = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        cols.append(np.clip(r, -1.0, 1.0))
    feats = np.stack(cols, axis=1)
    rate, start = frame_timing(spec.window_s, spec.hop_s)
    return LayerStack((feats.astype(np.float32),), rate, start)


_EXTRACTORS = {
    "spectral": extract_spectral,
    "projection_stack": extract_projection_stack,
    "pitch_salience": extract_pitch_salience,
}


def extract(clip: AudioClip, spec: ExtractorSpec) -> LayerStack:
    """Dispatch to the extractor named by ``spec.kind``."""
    return _EXTRACTORS[spec.kind](clip, spec)


def tone_frequency_hz(class_id: int) -> float:
    """Tone frequency encoding a first-factor label."""
    return 500.0 * (class_id + 1)


def modulation_rate_hz(class_id: int) -> float:
    """Amplitude-modulation rate encoding a second-factor label."""
    return 2.0 + 3.0 * class_id


# the carrier sits far above the tone range, and the noise floor is high
# enough that sideband leakage into wide-band bins only enters magnitudes at
# second order; both keep the factors separable by disjoint extractors only
MODULATION_CARRIER_HZ = 5000.0
_TONE_AMP = 0.25
_CARRIER_AMP = 0.25
_MODULATION_DEPTH = 0.5
_NOISE_AMP = 0.2


def make_synthetic_task(
    factor_count: int,
    classes_per_factor: int,
    clips_per_class: int,
    seed: int,
    duration_s: float = 2.0,
    sample_rate_hz: int = 16000,
) -> tuple[list[AudioClip], list[np.ndarray]]:
    """Build a labeled corpus with independent tone and modulation factors.

    Each clip sums a tone whose frequency encodes the factor-1 label, an
    amplitude-modulated carrier whose rate encodes the factor-2 label (when
    factor_count is 2), and seeded noise. Returns the clips and one label
    array per factor, deterministic in all arguments.
    """
    if factor_count not in (1, 2):
        raise ValidationError(f"factor_count must be 1 or 2, got {factor_count}")
    check_positive_int(classes_per_factor, "classes_per_factor")
    check_positive_int(clips_per_class, "clips_per_class")
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate_hz))
    t = np.arange(n, dtype=np.float64) / sample_rate_hz
    combos = list(itertools.product(range(classes_per_factor), repeat=factor_count))
    clips: list[AudioClip] = []
    labels = [[] for _ in range(factor_count)]
    for combo in combos:
        for _ in range(clips_per_class):
            x = _TONE_AMP * np.sin(
                2.0 * np.pi * tone_frequency_hz(combo[0]) * t + rng.uniform(0, 2 * np.pi)
            )
            if factor_count == 2:
                envelope = 1.0 + _MODULATION_DEPTH * np.sin(
                    2.0 * np.pi * modulation_rate_hz(combo[1]) * t + rng.uniform(0, 2 * np.pi)
                )
                carrier = np.sin(2.0 * np.pi * MODULATION_CARRIER_HZ * t + rng.uniform(0, 2 * np.pi))
                x = x + _CARRIER_AMP * envelope * carrier
            x = x + rng.uniform(-_NOISE_AMP, _NOISE_AMP, size=n)
            clips.append(AudioClip(x.astype(np.float32), sample_rate_hz))
            for f in range(factor_count):
                labels[f].append(combo[f])
    return clips, [np.asarray(l, dtype=np.int64) for l in labels]
