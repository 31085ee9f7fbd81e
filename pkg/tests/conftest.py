"""Shared fixtures: a frozen-seed synthetic corpus, embedding store, manifests,
and suite config used by the runner and acceptance tests."""

import json

import numpy as np
import pytest

from embfuse import EmbeddingStore, ExtractorSpec, extract, make_synthetic_task

CORPUS_SEED = 20240601
SUITE_SEED = 4242

# two complementary extractors plus a pitch map and a projection stack:
# tone_bank resolves the tone factor, mod_band resolves modulation sidebands
# around the carrier, period_map sees low-frequency periodicity, tone_proj
# stacks fixed tanh projections for layer-aggregation variants
EXTRACTOR_SPECS = (
    ExtractorSpec(id="tone_bank", kind="spectral", window_s=0.025, hop_s=0.010,
                  channels=40, band_lo_hz=200.0, band_hi_hz=2600.0),
    ExtractorSpec(id="mod_band", kind="spectral", window_s=1.0, hop_s=0.25,
                  channels=25, band_lo_hz=4988.0, band_hi_hz=5012.0),
    ExtractorSpec(id="period_map", kind="pitch_salience", window_s=0.064, hop_s=0.016,
                  channels=12, f0_min_hz=60.0, f0_max_hz=600.0),
    ExtractorSpec(id="tone_proj", kind="projection_stack", window_s=0.025, hop_s=0.010,
                  channels=32, layer_count=3, seed=777),
)

VARIANTS = (
    {"label": "single_tone", "name": "last_layer_single", "members": ["tone_bank"]},
    {"label": "single_mod", "name": "last_layer_single", "members": ["mod_band"]},
    {"label": "proj_last", "name": "last_layer_single", "members": ["tone_proj"]},
    {"label": "proj_aggregated", "name": "fusion_single", "members": ["tone_proj"]},
    {"label": "pair_avg", "name": "avg_pair", "members": ["tone_bank", "mod_band"]},
    {"label": "pair_cat", "name": "cat_pair", "members": ["tone_bank", "mod_band"]},
    {"label": "trio_cat", "name": "cat_triple",
     "members": ["tone_bank", "mod_band", "period_map"]},
    {"label": "trio_cat_grouped", "name": "cat_triple_grouped",
     "members": ["tone_bank", "mod_band", "period_map"]},
)

PROBE_PARAMS = {"learning_rate": 0.05, "batch_size": 16, "epochs": 150, "l2": 0.0001}


def split_for(index_in_class: int) -> str:
    if index_in_class < 6:
        return "train"
    if index_in_class == 6:
        return "valid"
    return "test"


def build_experiment(root):
    """Synthesize the two-factor corpus, extract every spec into a store, and
    write the two scene manifests plus a suite config under ``root``."""
    clips, labels = make_synthetic_task(
        factor_count=2, classes_per_factor=3, clips_per_class=10, seed=CORPUS_SEED
    )
    clip_ids = [f"clip_{i:03d}" for i in range(len(clips))]
    store = EmbeddingStore.create(root / "store")
    for clip_id, clip in zip(clip_ids, clips):
        for spec in EXTRACTOR_SPECS:
            store.add(spec.id, clip_id, extract(clip, spec))
    store.save()

    tone_names = [f"tone_{i}" for i in range(3)]
    rate_names = [f"rate_{i}" for i in range(3)]
    manifests = {}
    for task_id, vocab, factor in (
        ("factor_tone", tone_names, labels[0]),
        ("factor_rate", rate_names, labels[1]),
    ):
        clips_json = [
            {
                "clip_id": clip_ids[i],
                "split": split_for(i % 10),
                "label": vocab[int(factor[i])],
            }
            for i in range(len(clip_ids))
        ]
        manifest = {
            "task_id": task_id,
            "kind": "scene_classification",
            "metric": "accuracy",
            "label_vocab": vocab,
            "clips": clips_json,
        }
        path = root / f"{task_id}.json"
        path.write_text(json.dumps(manifest, indent=2))
        manifests[task_id] = path

    suite = {
        "seed": SUITE_SEED,
        "store": "store",
        "tasks": [p.name for p in manifests.values()],
        "variants": [dict(v) for v in VARIANTS],
        "probe": dict(PROBE_PARAMS),
    }
    suite_path = root / "suite.json"
    suite_path.write_text(json.dumps(suite, indent=2))
    return {
        "root": root,
        "store": root / "store",
        "manifests": manifests,
        "suite": suite_path,
        "labels": labels,
        "clip_ids": clip_ids,
    }


@pytest.fixture(scope="session")
def experiment(tmp_path_factory):
    root = tmp_path_factory.mktemp("experiment")
    return build_experiment(root)


@pytest.fixture(scope="session")
def toy_scene_setup(tmp_path_factory):
    """Small handcrafted store and manifest for runner unit tests: two
    extractors whose stacks linearly encode the class."""
    from embfuse import LayerStack

    root = tmp_path_factory.mktemp("toy")
    rng = np.random.default_rng(99)
    n_per_class, k = 6, 2
    store = EmbeddingStore.create(root / "store")
    clips_json = []
    for cls in range(k):
        for j in range(n_per_class):
            idx = cls * n_per_class + j
            clip_id = f"c{idx:02d}"
            base = np.zeros((12, 4)) + rng.normal(scale=0.2, size=(12, 4))
            base[:, cls] += 4.0
            store.add("alpha", clip_id, LayerStack(
                (base, base + rng.normal(scale=0.05, size=base.shape)), 50.0, 0.0))
            other = np.zeros((20, 6)) + rng.normal(scale=0.2, size=(20, 6))
            other[:, cls + 2] += 3.0
            store.add("beta", clip_id, LayerStack((other,), 100.0, 0.005))
            clips_json.append(
                {"clip_id": clip_id, "split": "train" if j < 4 else "test",
                 "label": f"k{cls}"}
            )
    store.save()
    manifest = {
        "task_id": "toy_scene",
        "kind": "scene_classification",
        "metric": "accuracy",
        "label_vocab": [f"k{c}" for c in range(k)],
        "clips": clips_json,
    }
    manifest_path = root / "toy_scene.json"
    manifest_path.write_text(json.dumps(manifest))
    return {"root": root, "store": root / "store", "manifest": manifest_path}
