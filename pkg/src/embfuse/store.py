"""On-disk embedding store: one EMB1 file per (extractor, clip), plus a JSON index.

Index layout (``index.json`` at the store root)::

    {"version": 1,
     "entries": [{"extractor_id": ..., "clip_id": ..., "path": ...,
                  "layer_count": L, "frame_count": T, "channel_count": C}, ...]}

Paths are relative to the root. Entries are kept sorted so rebuilding a store
from the same inputs produces identical bytes.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from pathlib import Path

from .containers import LayerStack
from .emb1 import load_embedding, read_header, write_embedding
from .errors import ConfigError, Emb1CorruptionError

INDEX_NAME = "index.json"
_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


def _check_id(value: str, what: str) -> str:
    if not _SAFE_ID.match(value):
        raise ConfigError(f"{what} {value!r} is not a safe identifier")
    return value


@dataclass(frozen=True)
class StoreEntry:
    extractor_id: str
    clip_id: str
    path: str
    layer_count: int
    frame_count: int
    channel_count: int


class EmbeddingStore:
    """Index-backed collection of layer stacks keyed by (extractor, clip)."""

    def __init__(self, root, entries: dict[tuple[str, str], StoreEntry]):
        self.root = Path(root)
        self._entries = entries

    @classmethod
    def create(cls, root) -> "EmbeddingStore":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        return cls(root, {})

    @classmethod
    def open(cls, root) -> "EmbeddingStore":
        """Load and validate an existing store.

        Every indexed file must exist and carry a header matching the
        indexed shape.
        """
        root = Path(root)
        index_path = root / INDEX_NAME
        if not index_path.is_file():
            raise ConfigError(f"no {INDEX_NAME} under {root}")
        try:
            raw = json.loads(index_path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"unparseable index at {index_path}: {exc}") from exc
        if raw.get("version") != 1:
            raise ConfigError(f"unsupported index version {raw.get('version')!r}")
        entries = {}
        for item in raw.get("entries", []):
            entry = StoreEntry(**item)
            file_path = root / entry.path
            if not file_path.is_file():
                raise ConfigError(f"indexed file missing: {file_path}")
            header = read_header(file_path)
            actual = (header.layer_count, header.frame_count, header.channel_count)
            expected = (entry.layer_count, entry.frame_count, entry.channel_count)
            if actual != expected:
                raise Emb1CorruptionError(
                    f"{file_path}: header dims {actual} do not match index {expected}"
                )
            entries[(entry.extractor_id, entry.clip_id)] = entry
        return cls(root, entries)

    def add(self, extractor_id: str, clip_id: str, stack: LayerStack) -> StoreEntry:
        """Write one stack into the store; call :meth:`save` to persist the index."""
        _check_id(extractor_id, "extractor_id")
        _check_id(clip_id, "clip_id")
        rel = f"{extractor_id}/{clip_id}.emb1"
        file_path = self.root / rel
        file_path.parent.mkdir(parents=True, exist_ok=True)
        write_embedding(stack, file_path)
        entry = StoreEntry(
            extractor_id,
            clip_id,
            rel,
            stack.layer_count,
            stack.frame_count,
            stack.channel_count,
        )
        self._entries[(extractor_id, clip_id)] = entry
        return entry

    def save(self) -> None:
        payload = {
            "version": 1,
            "entries": [asdict(self._entries[key]) for key in sorted(self._entries)],
        }
        (self.root / INDEX_NAME).write_text(json.dumps(payload, indent=2) + "\n")

    def has(self, extractor_id: str, clip_id: str) -> bool:
        return (extractor_id, clip_id) in self._entries

    def entry(self, extractor_id: str, clip_id: str) -> StoreEntry:
        return self._entries[(extractor_id, clip_id)]

    def extractor_ids(self) -> list[str]:
        return sorted({e for e, _ in self._entries})

    def clip_ids(self, extractor_id: str) -> list[str]:
        return sorted(c for e, c in self._entries if e == extractor_id)

    def fetch(self, extractor_id: str, clip_id: str) -> LayerStack:
        entry = self._entries[(extractor_id, clip_id)]
        return load_embedding(self.root / entry.path)

    def fetch_stacks(self, member_ids, clip_id: str) -> dict[str, LayerStack]:
        """All stacks one fusion call needs for a clip."""
        return {m: self.fetch(m, clip_id) for m in member_ids}
