"""Task manifests: clips, split assignment, labels, and the metric to report.

JSON schema::

    {"task_id": str,
     "kind": "scene_classification" | "scene_multilabel" | "event_detection",
     "metric": "accuracy" | "map" | "onset_fms",
     "label_vocab": [str, ...],
     "clips": [{"clip_id": str, "split": "train"|"valid"|"test",
                "label": str                      # scene_classification
                "labels": [str, ...]              # scene_multilabel
                "events": [{"onset_s": float, "label": str}, ...]  # event_detection
               }, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

SPLITS = ("train", "valid", "test")
KIND_TO_METRIC = {
    "scene_classification": "accuracy",
    "scene_multilabel": "map",
    "event_detection": "onset_fms",
}


@dataclass(frozen=True)
class ClipEntry:
    clip_id: str
    split: str
    label: str | None = None
    labels: tuple[str, ...] | None = None
    events: tuple[tuple[float, str], ...] | None = None


@dataclass(frozen=True)
class TaskManifest:
    task_id: str
    kind: str
    metric: str
    label_vocab: tuple[str, ...]
    clips: tuple[ClipEntry, ...]

    def __post_init__(self):
        if self.kind not in KIND_TO_METRIC:
            raise ConfigError(f"unknown task kind {self.kind!r}")
        if self.metric != KIND_TO_METRIC[self.kind]:
            raise ConfigError(
                f"metric {self.metric!r} incompatible with kind {self.kind!r}; "
                f"expected {KIND_TO_METRIC[self.kind]!r}"
            )
        if not self.label_vocab:
            raise ConfigError("label_vocab must not be empty")
        if len(set(self.label_vocab)) != len(self.label_vocab):
            raise ConfigError("label_vocab contains duplicates")
        seen = set()
        vocab = set(self.label_vocab)
        for clip in self.clips:
            if clip.clip_id in seen:
                raise ConfigError(f"clip {clip.clip_id!r} assigned more than once")
            seen.add(clip.clip_id)
            if clip.split not in SPLITS:
                raise ConfigError(f"clip {clip.clip_id!r} has unknown split {clip.split!r}")
            self._check_payload(clip, vocab)

    def _check_payload(self, clip: ClipEntry, vocab: set[str]) -> None:
        if self.kind == "scene_classification":
            if clip.label is None or clip.label not in vocab:
                raise ConfigError(f"clip {clip.clip_id!r}: label {clip.label!r} not in vocab")
        elif self.kind == "scene_multilabel":
            if clip.labels is None:
                raise ConfigError(f"clip {clip.clip_id!r}: missing labels")
            bad = [l for l in clip.labels if l not in vocab]
            if bad:
                raise ConfigError(f"clip {clip.clip_id!r}: labels not in vocab: {bad}")
        else:
            if clip.events is None:
                raise ConfigError(f"clip {clip.clip_id!r}: missing events")
            for onset, label in clip.events:
                if label not in vocab:
                    raise ConfigError(f"clip {clip.clip_id!r}: event label {label!r} not in vocab")
                if onset < 0.0:
                    raise ConfigError(f"clip {clip.clip_id!r}: negative onset {onset}")

    def clips_in(self, split: str) -> list[ClipEntry]:
        return [c for c in self.clips if c.split == split]

    def label_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.label_vocab)}

    @classmethod
    def from_dict(cls, d: dict) -> "TaskManifest":
        try:
            kind = d["kind"]
            clips = []
            for raw in d["clips"]:
                events = raw.get("events")
                clips.append(
                    ClipEntry(
                        clip_id=str(raw["clip_id"]),
                        split=str(raw["split"]),
                        label=raw.get("label"),
                        labels=tuple(raw["labels"]) if "labels" in raw else None,
                        events=tuple((float(e["onset_s"]), str(e["label"])) for e in events)
                        if events is not None
                        else None,
                    )
                )
            return cls(
                task_id=str(d["task_id"]),
                kind=str(kind),
                metric=str(d["metric"]),
                label_vocab=tuple(d["label_vocab"]),
                clips=tuple(clips),
            )
        except KeyError as exc:
            raise ConfigError(f"manifest missing required field: {exc}") from exc

    @classmethod
    def from_json_file(cls, path) -> "TaskManifest":
        path = Path(path)
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"unparseable manifest at {path}: {exc}") from exc

    def to_dict(self) -> dict:
        clips = []
        for c in self.clips:
            item: dict = {"clip_id": c.clip_id, "split": c.split}
            if self.kind == "scene_classification":
                item["label"] = c.label
            elif self.kind == "scene_multilabel":
                item["labels"] = list(c.labels or ())
            else:
                item["events"] = [{"onset_s": t, "label": l} for t, l in (c.events or ())]
            clips.append(item)
        return {
            "task_id": self.task_id,
            "kind": self.kind,
            "metric": self.metric,
            "label_vocab": list(self.label_vocab),
            "clips": clips,
        }
