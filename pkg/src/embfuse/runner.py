"""Suite orchestration: realize fusion variants, train probes per task, score.

A suite is a grid of (task, variant) cells. Each cell gets its own seed,
derived from the global seed by a stable hash, so any cell can be reproduced
in isolation. Cells are independent and may run in parallel; the report is
assembled in sorted order, so the emitted bytes never depend on scheduling.

The CSV report is the machine contract and contains only deterministic
columns; wall-clock time appears in the aligned-text rendering only.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .containers import EmbeddingSequence
from .errors import ConfigError
from .fusion import FusionConfig, fuse, named_variant, scene_embed
from .manifest import TaskManifest
from .metrics import (
    DEFAULT_ONSET_TOLERANCE_S,
    EventizerConfig,
    EventList,
    accuracy,
    eventize,
    mean_average_precision,
    onset_match_counts,
)
from .probe import ProbeConfig, predict, predict_proba, train_probe
from .store import EmbeddingStore

CSV_COLUMNS = (
    "task_id",
    "variant",
    "metric",
    "value",
    "probe_width",
    "scene_mode",
    "group_count",
    "probe_digest",
    "seed",
    "status",
    "error",
)


@dataclass(frozen=True)
class ReportRow:
    task_id: str
    variant: str
    metric: str
    value: float | None
    probe_width: int | None
    scene_mode: str
    group_count: int
    probe_digest: str
    seed: int
    wall_time_s: float
    status: str = "ok"
    error: str = ""

    def __post_init__(self):
        if self.status == "ok":
            if self.value is None or not (0.0 <= self.value <= 1.0):
                raise ConfigError(f"metric {self.metric} value {self.value} out of [0, 1]")

    def csv_cells(self) -> list[str]:
        return [
            self.task_id,
            self.variant,
            self.metric,
            "" if self.value is None else f"{self.value:.6f}",
            "" if self.probe_width is None else str(self.probe_width),
            self.scene_mode,
            str(self.group_count),
            self.probe_digest,
            str(self.seed),
            self.status,
            self.error.replace("\n", " ").replace(",", ";"),
        ]


@dataclass(frozen=True)
class RunReport:
    rows: tuple[ReportRow, ...]

    def sorted_rows(self) -> list[ReportRow]:
        return sorted(self.rows, key=lambda r: (r.task_id, r.variant))

    def to_csv(self) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for row in self.sorted_rows():
            lines.append(",".join(row.csv_cells()))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        headers = list(CSV_COLUMNS) + ["wall_time_s"]
        table = [headers]
        for row in self.sorted_rows():
            table.append(row.csv_cells() + [f"{row.wall_time_s:.3f}"])
        widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
        lines = []
        for i, r in enumerate(table):
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> tuple[Path, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "report.csv"
        text_path = out_dir / "report.txt"
        csv_path.write_text(self.to_csv())
        text_path.write_text(self.to_text())
        return csv_path, text_path


def cell_seed(global_seed: int, task_id: str, variant: str) -> int:
    """Per-cell seed: low 8 bytes of blake2b over "<seed>:<task>:<variant>"."""
    digest = hashlib.blake2b(
        f"{global_seed}:{task_id}:{variant}".encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "little")


def probe_digest(cfg: ProbeConfig) -> str:
    payload = json.dumps(
        {
            "hidden_units": cfg.hidden_units,
            "objective": cfg.objective,
            "learning_rate": cfg.learning_rate,
            "batch_size": cfg.batch_size,
            "epochs": cfg.epochs,
            "l2": cfg.l2,
            "seed": cfg.seed,
        },
        sort_keys=True,
    )
    return hashlib.blake2b(payload.encode(), digest_size=6).hexdigest()


def _check_store_coverage(manifest: TaskManifest, store: EmbeddingStore, cfg: FusionConfig):
    missing = [
        (member, clip.clip_id)
        for clip in manifest.clips
        for member in cfg.member_ids
        if not store.has(member, clip.clip_id)
    ]
    if missing:
        raise ConfigError(f"missing embeddings for (extractor, clip) pairs: {missing}")


def frame_targets(
    events: tuple[tuple[float, str], ...],
    frame_times: np.ndarray,
    label_index: dict[str, int],
    positive_window_s: float,
) -> np.ndarray:
    """Binary per-frame targets: a frame is positive for a class within
    [onset, onset + positive_window_s) of one of its events."""
    targets = np.zeros((frame_times.size, len(label_index)))
    for onset, label in events:
        k = label_index[label]
        inside = (frame_times >= onset) & (frame_times < onset + positive_window_s)
        targets[inside, k] = 1.0
    return targets


def _scene_metric(manifest, store, fusion_cfg, probe_cfg):
    index = manifest.label_index()
    vectors: dict[str, np.ndarray] = {}
    for clip in manifest.clips:
        stacks = store.fetch_stacks(fusion_cfg.member_ids, clip.clip_id)
        vectors[clip.clip_id] = scene_embed(fuse(stacks, fusion_cfg), fusion_cfg).values
    train = manifest.clips_in("train")
    test = manifest.clips_in("test")
    if not train:
        raise ConfigError(f"task {manifest.task_id!r}: empty train split")
    if not test:
        raise ConfigError(f"task {manifest.task_id!r}: empty test split")
    x_train = np.stack([vectors[c.clip_id] for c in train])
    x_test = np.stack([vectors[c.clip_id] for c in test])
    if manifest.kind == "scene_classification":
        y_train = np.asarray([index[c.label] for c in train])
        y_test = np.asarray([index[c.label] for c in test])
        model = train_probe(x_train, y_train, probe_cfg, n_classes=len(index))
        value = accuracy(predict(model, x_test), y_test)
    else:
        def binary(clips):
            mat = np.zeros((len(clips), len(index)))
            for i, c in enumerate(clips):
                for name in c.labels or ():
                    mat[i, index[name]] = 1.0
            return mat

        model = train_probe(x_train, binary(train), probe_cfg, n_classes=len(index))
        value = mean_average_precision(predict_proba(model, x_test), binary(test))
    return value, x_train.shape[1]


def _event_metric(manifest, store, fusion_cfg, probe_cfg, eventizer_cfg, tolerance_s):
    index = manifest.label_index()
    fused: dict[str, EmbeddingSequence] = {}
    for clip in manifest.clips:
        stacks = store.fetch_stacks(fusion_cfg.member_ids, clip.clip_id)
        fused[clip.clip_id] = fuse(stacks, fusion_cfg)
    train = manifest.clips_in("train")
    test = manifest.clips_in("test")
    if not train:
        raise ConfigError(f"task {manifest.task_id!r}: empty train split")
    if not test:
        raise ConfigError(f"task {manifest.task_id!r}: empty test split")
    window = eventizer_cfg.min_duration_s
    x_train = np.concatenate([fused[c.clip_id].data for c in train])
    y_train = np.concatenate(
        [
            frame_targets(c.events or (), fused[c.clip_id].frame_times(), index, window)
            for c in train
        ]
    )
    model = train_probe(x_train, y_train, probe_cfg, n_classes=len(index))
    matches = n_pred = n_ref = 0
    for c in test:
        seq = fused[c.clip_id]
        probs = predict_proba(model, seq.data)
        predicted = eventize(probs, seq.frame_times(), eventizer_cfg)
        reference = EventList.from_events(
            (onset, index[label]) for onset, label in (c.events or ())
        )
        m, p, r = onset_match_counts(predicted, reference, tolerance_s)
        matches += m
        n_pred += p
        n_ref += r
    if n_pred == 0 and n_ref == 0:
        return 1.0, x_train.shape[1]
    precision = matches / n_pred if n_pred else 0.0
    recall = matches / n_ref if n_ref else 0.0
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return f1, x_train.shape[1]


def run_variant(
    manifest: TaskManifest,
    store: EmbeddingStore,
    fusion_cfg: FusionConfig,
    probe_cfg: ProbeConfig,
    eventizer_cfg: EventizerConfig | None = None,
    onset_tolerance_s: float = DEFAULT_ONSET_TOLERANCE_S,
    variant_label: str = "variant",
) -> ReportRow:
    """Evaluate one fusion variant on one task and return a report row.

    Scene tasks pool fused sequences to scene vectors and train a clip-level
    probe; event tasks train a frame-level probe on onset-anchored positive
    windows and score eventized test predictions.
    """
    started = time.perf_counter()
    _check_store_coverage(manifest, store, fusion_cfg)
    if manifest.kind == "event_detection":
        expected = "sigmoid_bce"
    elif manifest.kind == "scene_multilabel":
        expected = "sigmoid_bce"
    else:
        expected = "softmax_xent"
    if probe_cfg.objective != expected:
        raise ConfigError(
            f"task kind {manifest.kind!r} needs probe objective {expected!r}, "
            f"got {probe_cfg.objective!r}"
        )
    if manifest.kind == "event_detection":
        value, width = _event_metric(
            manifest, store, fusion_cfg, probe_cfg, eventizer_cfg or EventizerConfig(),
            onset_tolerance_s,
        )
    else:
        value, width = _scene_metric(manifest, store, fusion_cfg, probe_cfg)
    return ReportRow(
        task_id=manifest.task_id,
        variant=variant_label,
        metric=manifest.metric,
        value=value,
        probe_width=width,
        scene_mode=fusion_cfg.scene_mode,
        group_count=fusion_cfg.group_count,
        probe_digest=probe_digest(probe_cfg),
        seed=probe_cfg.seed,
        wall_time_s=time.perf_counter() - started,
    )


@dataclass(frozen=True)
class SuiteVariant:
    label: str
    config: FusionConfig


@dataclass(frozen=True)
class SuiteConfig:
    seed: int
    store: Path
    tasks: tuple[Path, ...]
    variants: tuple[SuiteVariant, ...]
    probe: dict = field(default_factory=dict)
    eventizer: EventizerConfig = field(default_factory=EventizerConfig)
    onset_tolerance_s: float = DEFAULT_ONSET_TOLERANCE_S


def _parse_variant(raw: dict) -> SuiteVariant:
    if "label" not in raw:
        raise ConfigError(f"variant entry needs a label: {raw}")
    label = str(raw["label"])
    if "config" in raw:
        return SuiteVariant(label, FusionConfig.from_dict(raw["config"]))
    if "name" not in raw or "members" not in raw:
        raise ConfigError(f"variant {label!r} needs either config or name+members")
    cfg = named_variant(
        raw["name"],
        raw["members"],
        reference=raw.get("reference"),
        group_count=raw.get("group_count", 5),
    )
    return SuiteVariant(label, cfg)


def load_suite_config(path) -> SuiteConfig:
    """Parse a suite config JSON file; relative paths resolve against it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"unparseable suite config at {path}: {exc}") from exc
    base = path.parent
    try:
        tasks = tuple((base / t).resolve() for t in raw["tasks"])
        variants = tuple(_parse_variant(v) for v in raw["variants"])
        store = (base / raw["store"]).resolve()
    except KeyError as exc:
        raise ConfigError(f"suite config missing required field: {exc}") from exc
    labels = [v.label for v in variants]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"duplicate variant labels: {labels}")
    eventizer = EventizerConfig(**raw.get("eventizer", {}))
    return SuiteConfig(
        seed=int(raw.get("seed", 0)),
        store=store,
        tasks=tasks,
        variants=variants,
        probe=dict(raw.get("probe", {})),
        eventizer=eventizer,
        onset_tolerance_s=float(raw.get("onset_tolerance_s", DEFAULT_ONSET_TOLERANCE_S)),
    )


def _probe_for(suite: SuiteConfig, kind: str, seed: int) -> ProbeConfig:
    # the objective follows the task kind and the seed fans out per cell, so
    # neither may be pinned in the suite's probe section
    params = dict(suite.probe)
    params.pop("objective", None)
    params.pop("seed", None)
    objective = "softmax_xent" if kind == "scene_classification" else "sigmoid_bce"
    try:
        return ProbeConfig(objective=objective, seed=seed, **params)
    except TypeError as exc:
        raise ConfigError(f"bad probe settings {sorted(params)}: {exc}") from exc


def run_suite(config, out_dir=None, seed: int | None = None, jobs: int = 1) -> RunReport:
    """Execute every (task, variant) cell of a suite.

    ``config`` is a path to a suite JSON or an already-loaded
    :class:`SuiteConfig`. Per-cell failures are recorded in the report and
    do not stop the suite. Returns the report; also writes report.csv and
    report.txt when ``out_dir`` is given.
    """
    suite = config if isinstance(config, SuiteConfig) else load_suite_config(config)
    if seed is not None:
        suite = replace(suite, seed=int(seed))
    store = EmbeddingStore.open(suite.store)
    manifests = [TaskManifest.from_json_file(t) for t in suite.tasks]
    cells = [(m, v) for m in manifests for v in suite.variants]

    def run_cell(cell) -> ReportRow:
        manifest, variant = cell
        cseed = cell_seed(suite.seed, manifest.task_id, variant.label)
        started = time.perf_counter()
        try:
            probe_cfg = _probe_for(suite, manifest.kind, cseed)
            return run_variant(
                manifest,
                store,
                variant.config,
                probe_cfg,
                eventizer_cfg=suite.eventizer,
                onset_tolerance_s=suite.onset_tolerance_s,
                variant_label=variant.label,
            )
        except Exception as exc:  # cell failures must not kill the suite
            return ReportRow(
                task_id=manifest.task_id,
                variant=variant.label,
                metric=manifest.metric,
                value=None,
                probe_width=None,
                scene_mode=variant.config.scene_mode,
                group_count=variant.config.group_count,
                probe_digest="",
                seed=cseed,
                wall_time_s=time.perf_counter() - started,
                status="error",
                error=f"{type(exc).__name__}: {exc}",
            )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    report = RunReport(tuple(rows))
    if out_dir is not None:
        report.write(out_dir)
    return report
