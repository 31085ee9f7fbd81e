"""Ensemble fusion: align members to a reference grid, combine, pool to scenes.

The functional entry points are :func:`fuse` and :func:`scene_embed`;
:class:`SceneEmbedder` wraps them in a scikit-learn transformer so a fusion
variant composes with pipelines and grid search.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .containers import EmbeddingSequence, LayerStack, SceneVector
from .errors import ConfigError, ValidationError
from .ops import (
    average_features,
    concat_features,
    grouped_pool,
    last_layer,
    layer_aggregate,
    mean_pool,
    resample,
)

COMBINE_MODES = ("concat", "average")
SCENE_MODES = ("mean", "grouped")


@dataclass(frozen=True)
class FusionConfig:
    """Describes one ensemble variant.

    ``aggregate_layers`` holds one flag per member: aggregated members use
    the mean over all layers, the rest use the last layer only. Every member
    is resampled to the reference member's (T, C) before combination.
    """

    member_ids: tuple[str, ...]
    aggregate_layers: tuple[bool, ...] = True
    combine: str = "concat"
    reference_member: str | None = None
    scene_mode: str = "mean"
    group_count: int = 5

    def __post_init__(self):
        members = tuple(str(m) for m in self.member_ids)
        if len(members) < 1:
            raise ConfigError("member_ids must not be empty")
        if len(set(members)) != len(members):
            raise ConfigError(f"duplicate member ids: {members}")
        agg = self.aggregate_layers
        if isinstance(agg, bool):
            agg = (agg,) * len(members)
        agg = tuple(bool(a) for a in agg)
        if len(agg) != len(members):
            raise ConfigError(
                f"aggregate_layers has {len(agg)} entries for {len(members)} members"
            )
        ref = self.reference_member if self.reference_member is not None else members[0]
        if ref not in members:
            raise ConfigError(f"reference_member {ref!r} not among members {members}")
        if self.combine not in COMBINE_MODES:
            raise ConfigError(f"combine must be one of {COMBINE_MODES}, got {self.combine!r}")
        if self.scene_mode not in SCENE_MODES:
            raise ConfigError(f"scene_mode must be one of {SCENE_MODES}, got {self.scene_mode!r}")
        if int(self.group_count) < 1:
            raise ConfigError(f"group_count must be >= 1, got {self.group_count}")
        object.__setattr__(self, "member_ids", members)
        object.__setattr__(self, "aggregate_layers", agg)
        object.__setattr__(self, "reference_member", ref)
        object.__setattr__(self, "group_count", int(self.group_count))

    def to_dict(self) -> dict:
        return {
            "member_ids": list(self.member_ids),
            "aggregate_layers": list(self.aggregate_layers),
            "combine": self.combine,
            "reference_member": self.reference_member,
            "scene_mode": self.scene_mode,
            "group_count": self.group_count,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "FusionConfig":
        allowed = {
            "member_ids",
            "aggregate_layers",
            "combine",
            "reference_member",
            "scene_mode",
            "group_count",
        }
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown fusion config keys: {sorted(unknown)}")
        if "member_ids" not in d:
            raise ConfigError("fusion config requires member_ids")
        kwargs = dict(d)
        kwargs["member_ids"] = tuple(kwargs["member_ids"])
        if "aggregate_layers" in kwargs and not isinstance(kwargs["aggregate_layers"], bool):
            kwargs["aggregate_layers"] = tuple(kwargs["aggregate_layers"])
        return cls(**kwargs)


def fuse(stacks: Mapping[str, LayerStack], cfg: FusionConfig) -> EmbeddingSequence:
    """Build the fused T x C sequence for one clip.

    Per member: aggregate layers or take the last one, resample to the
    reference member's dimensions, then concatenate or average. The result
    carries the reference member's timing.
    """
    missing = [m for m in cfg.member_ids if m not in stacks]
    if missing:
        raise KeyError(f"missing stacks for members: {missing}")
    parts = []
    for member, aggregate in zip(cfg.member_ids, cfg.aggregate_layers):
        stack = stacks[member]
        parts.append(layer_aggregate(stack) if aggregate else last_layer(stack))
    ref = parts[cfg.member_ids.index(cfg.reference_member)]
    t_ref, c_ref = ref.shape
    aligned = [
        resample(p, t_ref, c_ref).with_timing(ref.frame_rate_hz, ref.t_start_s) for p in parts
    ]
    if cfg.combine == "concat":
        return concat_features(aligned)
    return average_features(aligned)


def scene_embed(seq: EmbeddingSequence, cfg: FusionConfig) -> SceneVector:
    """Pool a sequence to a scene vector according to the config's scene mode."""
    if cfg.scene_mode == "mean":
        return mean_pool(seq)
    return grouped_pool(seq, cfg.group_count)


VARIANT_NAMES = (
    "last_layer_single",
    "fusion_single",
    "avg_pair",
    "cat_pair",
    "cat_triple",
    "cat_triple_grouped",
)

_VARIANT_SHAPES = {
    "last_layer_single": (1, False, "concat", "mean"),
    "fusion_single": (1, True, "concat", "mean"),
    "avg_pair": (2, True, "average", "mean"),
    "cat_pair": (2, True, "concat", "mean"),
    "cat_triple": (3, True, "concat", "mean"),
    "cat_triple_grouped": (3, True, "concat", "grouped"),
}


def named_variant(
    name: str,
    members: Iterable[str],
    reference: str | None = None,
    group_count: int = 5,
) -> FusionConfig:
    """Expand a named ensemble variant into a full FusionConfig."""
    if name not in _VARIANT_SHAPES:
        raise ConfigError(f"unknown variant {name!r}, expected one of {VARIANT_NAMES}")
    members = tuple(members)
    count, aggregate, combine, scene_mode = _VARIANT_SHAPES[name]
    if len(members) != count:
        raise ConfigError(f"variant {name!r} takes {count} members, got {len(members)}")
    return FusionConfig(
        member_ids=members,
        aggregate_layers=aggregate,
        combine=combine,
        reference_member=reference,
        scene_mode=scene_mode,
        group_count=group_count,
    )


class SceneEmbedder(BaseEstimator, TransformerMixin):
    """Transformer from per-clip stack mappings to scene-embedding rows.

    ``X`` is an iterable of mappings from extractor id to
    :class:`LayerStack`; ``transform`` returns one scene vector per clip as
    an (N, D) float32 array, ready for a downstream classifier.
    """

    def __init__(
        self,
        member_ids=(),
        aggregate_layers=True,
        combine="concat",
        reference_member=None,
        scene_mode="mean",
        group_count=5,
    ):
        self.member_ids = member_ids
        self.aggregate_layers = aggregate_layers
        self.combine = combine
        self.reference_member = reference_member
        self.scene_mode = scene_mode
        self.group_count = group_count

    def _config(self) -> FusionConfig:
        agg = self.aggregate_layers
        return FusionConfig(
            member_ids=tuple(self.member_ids),
            aggregate_layers=agg if isinstance(agg, bool) else tuple(agg),
            combine=self.combine,
            reference_member=self.reference_member,
            scene_mode=self.scene_mode,
            group_count=self.group_count,
        )

    def fit(self, X=None, y=None):
        self._config()
        return self

    def transform(self, X) -> np.ndarray:
        cfg = self._config()
        rows = [scene_embed(fuse(stacks, cfg), cfg).values for stacks in X]
        if not rows:
            raise ValidationError("transform needs at least one clip")
        widths = {r.shape[0] for r in rows}
        if len(widths) != 1:
            raise ValidationError(f"clips produced inconsistent widths: {sorted(widths)}")
        return np.stack(rows, axis=0)
