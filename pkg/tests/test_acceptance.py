"""Acceptance suite: one test per exit criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Every tolerance is pinned here; the synthetic-experiment thresholds
were established once on the frozen corpus seed and act as regressions.
"""

import struct
import time

import numpy as np
import pytest

from embfuse import (
    Emb1CorruptionError,
    Emb1FormatError,
    EmbeddingSequence,
    EventList,
    FusionConfig,
    LayerStack,
    ProbeConfig,
    concat_features,
    eventize,
    fuse,
    gradient,
    grouped_pool,
    layer_aggregate,
    load_embedding,
    loss,
    mean_average_precision,
    mean_pool,
    onset_fms,
    predict,
    resample,
    run_suite,
    scene_embed,
    train_probe,
    write_embedding,
)
from embfuse.metrics import EventizerConfig
from embfuse.probe import ProbeModel

from conftest import build_experiment


def _report(name):
    print(f"PASS: {name}")


def test_criterion_fusion_math_oracles():
    started = time.perf_counter()
    rng = np.random.default_rng(20240601)

    # layer aggregation vs elementwise-mean oracle
    layers = [rng.normal(size=(6, 5)) for _ in range(4)]
    agg = layer_aggregate(LayerStack(tuple(layers), 50.0, 0.0)).data
    coerced = [l.astype(np.float32) for l in layers]
    oracle = np.empty((6, 5))
    for t in range(6):
        for c in range(5):
            oracle[t, c] = sum(float(l[t, c]) for l in coerced) / 4.0
    assert np.max(np.abs(agg - oracle)) < 1e-6

    # resampling reproduces affine signals exactly
    src = np.array([[3.0 * t - 2.0 * c for c in range(4)] for t in range(5)])
    out = resample(EmbeddingSequence(src, 10.0, 0.0), 9, 7).data
    tt = np.arange(9) * 4.0 / 8.0
    cc = np.arange(7) * 3.0 / 6.0
    assert np.max(np.abs(out - (3.0 * tt[:, None] - 2.0 * cc[None, :]))) < 1e-6

    # concatenation: member slices recover bit-exactly
    members = [EmbeddingSequence(rng.normal(size=(10, 8)), 25.0, 0.0) for _ in range(3)]
    cat = concat_features(members)
    for m_idx, member in enumerate(members):
        np.testing.assert_array_equal(cat.data[:, 8 * m_idx : 8 * (m_idx + 1)], member.data)

    # mean pooling vs column-mean oracle
    seq = EmbeddingSequence(rng.normal(size=(50, 12)), 25.0, 0.0)
    pooled = mean_pool(seq).values
    col_oracle = np.asarray(
        [sum(float(seq.data[t, c]) for t in range(50)) / 50.0 for c in range(12)]
    )
    assert np.max(np.abs(pooled - col_oracle)) < 1e-6

    # grouped pooling vs explicit floor-partition oracle
    seq7 = EmbeddingSequence(rng.normal(size=(7, 3)), 25.0, 0.0)
    grouped = grouped_pool(seq7, 5).values
    pieces, prev = [], None
    for g in range(5):
        lo, hi = g * 7 // 5, (g + 1) * 7 // 5
        if hi > lo:
            prev = np.asarray(
                [sum(float(seq7.data[t, c]) for t in range(lo, hi)) / (hi - lo) for c in range(3)]
            )
        pieces.append(prev)
    assert np.max(np.abs(grouped - np.concatenate(pieces))) < 1e-6

    # grouped pooling with one group is exactly mean pooling
    np.testing.assert_array_equal(grouped_pool(seq, 1).values, mean_pool(seq).values)

    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    _report(f"fusion-math oracle suite (1e-6, {elapsed:.2f}s < 10s)")


def test_criterion_shape_contract():
    rng = np.random.default_rng(7)
    stacks = {
        "ref": LayerStack((rng.normal(size=(49, 1024)),), 50.0, 0.0),
        "wide": LayerStack((rng.normal(size=(49, 1280)),), 50.0, 0.0),
        "fast": LayerStack((rng.normal(size=(99, 256)),), 100.0, 0.0),
    }
    cfg = FusionConfig(
        member_ids=("ref", "wide", "fast"),
        reference_member="ref",
        scene_mode="grouped",
        group_count=5,
    )
    fused = fuse(stacks, cfg)
    assert fused.shape == (49, 3072)
    scene = scene_embed(fused, cfg)
    assert scene.length == 15360
    _report("shape contract: 3 members -> 49x3072 fused, grouped scene length 15360")


def _fd_gradient(model, X, y, l2, h=1e-5):
    params = list(model.weights) + list(model.biases)
    n_w = len(model.weights)

    def rebuilt(arrays):
        return ProbeModel(tuple(arrays[:n_w]), tuple(arrays[n_w:]), model.objective)

    out = []
    for p_idx, param in enumerate(params):
        g = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            plus = [p.copy() for p in params]
            minus = [p.copy() for p in params]
            plus[p_idx][idx] += h
            minus[p_idx][idx] -= h
            g[idx] = (loss(rebuilt(plus), X, y, l2) - loss(rebuilt(minus), X, y, l2)) / (2 * h)
        out.append(g)
    return out


def test_criterion_probe_correctness():
    rng = np.random.default_rng(515151)

    # analytic vs central finite differences at 10 seeded points
    for point in range(10):
        objective = "softmax_xent" if point % 2 == 0 else "sigmoid_bce"
        hidden = 0 if point < 5 else 3
        if hidden == 0:
            model = ProbeModel(
                (rng.normal(size=(5, 3)),), (rng.normal(size=3),), objective
            )
        else:
            model = ProbeModel(
                (rng.normal(size=(5, hidden)), rng.normal(size=(hidden, 3))),
                (rng.normal(size=hidden), rng.normal(size=3)),
                objective,
            )
        X = rng.normal(size=(6, 5))
        if objective == "softmax_xent":
            y = rng.integers(0, 3, size=6)
        else:
            y = (rng.uniform(size=(6, 3)) > 0.5).astype(float)
        l2 = 0.01
        analytic = gradient(model, X, y, l2)
        numeric = _fd_gradient(model, X, y, l2)
        for a, b in zip(list(analytic.weights) + list(analytic.biases), numeric):
            rel = np.abs(a - b) / np.maximum.reduce(
                [np.abs(a), np.abs(b), np.full_like(a, 1e-6)]
            )
            assert float(rel.max()) < 1e-4

    # full-batch descent on the convex linear probe: loss never increases
    X = rng.normal(size=(40, 5))
    y = rng.integers(0, 3, size=40)
    model = train_probe(X, y, ProbeConfig(learning_rate=0.05, batch_size=40, epochs=60, seed=2))
    history = np.asarray(model.metadata["loss_history"])
    assert np.all(np.diff(history) <= 1e-12)

    # well-separated blobs reach 100% training accuracy
    x0 = rng.normal(size=(20, 5)) * 0.5 - 2.0
    x1 = rng.normal(size=(20, 5)) * 0.5 + 2.0
    Xb = np.vstack([x0, x1])
    yb = np.array([0] * 20 + [1] * 20)
    blob_model = train_probe(
        Xb, yb, ProbeConfig(learning_rate=0.5, batch_size=40, epochs=200, seed=1)
    )
    assert float(np.mean(predict(blob_model, Xb) == yb)) == 1.0
    _report("probe correctness: gradcheck rel<1e-4 at 10 points, monotone loss, blobs 100%")


def test_criterion_metric_oracles():
    # hand case
    value = mean_average_precision(np.array([[0.9], [0.8], [0.1]]), np.array([[1], [0], [1]]))
    assert abs(value - 0.8333) < 1e-4

    # brute-force AP oracle on a seeded 30x4 instance
    rng = np.random.default_rng(3030)
    scores = rng.uniform(size=(30, 4))
    labels = (rng.uniform(size=(30, 4)) > 0.6).astype(int)
    labels[0] = 1
    def ap_bruteforce(s, l):
        positives = [i for i in range(len(s)) if l[i] == 1]
        total = 0.0
        for i in positives:
            rank = 1 + sum(
                1 for j in range(len(s)) if s[j] > s[i] or (s[j] == s[i] and j < i)
            )
            hits = sum(1 for j in positives if s[j] > s[i] or (s[j] == s[i] and j <= i))
            total += hits / rank
        return total / len(positives)

    got = mean_average_precision(scores, labels)
    want = np.mean([ap_bruteforce(scores[:, k].tolist(), labels[:, k].tolist()) for k in range(4)])
    assert abs(got - want) < 1e-9

    # onset hand case: one of two within 50 ms tolerance
    pred = EventList.from_events([(0.0, 0), (1.0, 0)])
    ref = EventList.from_events([(0.0, 0), (1.06, 0)])
    precision, recall, f1 = onset_fms(pred, ref, tolerance_s=0.05)
    assert (precision, recall, f1) == (0.5, 0.5, 0.5)

    # eventize monotonicity over a seeded threshold sweep
    rng = np.random.default_rng(606)
    grid = np.arange(200) / 100.0
    probs = np.zeros((200, 3))
    for k in range(3):
        center = rng.uniform(0.4, 1.6)
        width = rng.uniform(0.05, 0.4)
        probs[:, k] = rng.uniform(0.55, 0.95) * np.exp(-0.5 * ((grid - center) / width) ** 2)
    counts = [
        len(eventize(probs, grid, EventizerConfig(threshold=float(th), min_duration_s=0.02)))
        for th in np.linspace(0.05, 0.95, 19)
    ]
    assert counts[0] > 0
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    _report("metric oracles: mAP 1e-9 + hand 0.8333, onset F=0.5 exact, eventize monotone")


def test_criterion_synthetic_experiment(tmp_path):
    started = time.perf_counter()
    exp = build_experiment(tmp_path)
    report = run_suite(exp["suite"], jobs=1)
    rows = {(r.task_id, r.variant): r for r in report.sorted_rows()}
    assert all(r.status == "ok" for r in rows.values())

    # each single extractor separates its own factor and not the other
    assert rows[("factor_tone", "single_tone")].value >= 0.95
    assert rows[("factor_rate", "single_mod")].value >= 0.95
    assert rows[("factor_rate", "single_tone")].value <= 0.6
    assert rows[("factor_tone", "single_mod")].value <= 0.6

    # concat fusion keeps both factors within 0.01 of the best single
    for task in ("factor_tone", "factor_rate"):
        best_single = max(
            rows[(task, "single_tone")].value, rows[(task, "single_mod")].value
        )
        assert rows[(task, "pair_cat")].value >= best_single - 0.01

    # last-layer and aggregated single-member variants both run and report
    for task in ("factor_tone", "factor_rate"):
        for variant in ("proj_last", "proj_aggregated"):
            assert rows[(task, variant)].status == "ok"
            assert 0.0 <= rows[(task, variant)].value <= 1.0

    # grouped rows widen the probe input by the group count
    assert rows[("factor_tone", "trio_cat")].probe_width == 120
    assert rows[("factor_tone", "trio_cat_grouped")].probe_width == 600

    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    _report(f"ensemble synthetic experiment (thresholds met, {elapsed:.1f}s < 120s)")


def test_criterion_determinism(experiment):
    first = run_suite(experiment["suite"], out_dir=experiment["root"] / "run1")
    second = run_suite(experiment["suite"], out_dir=experiment["root"] / "run2")
    csv_a = (experiment["root"] / "run1" / "report.csv").read_bytes()
    csv_b = (experiment["root"] / "run2" / "report.csv").read_bytes()
    assert csv_a == csv_b
    assert first.to_csv() == second.to_csv()
    _report("determinism: identical suite config twice -> byte-identical CSV")


def test_criterion_emb1_round_trip(tmp_path):
    rng = np.random.default_rng(88)
    stack = LayerStack(tuple(rng.normal(size=(49, 64)) for _ in range(3)), 50.0, 0.0125)
    path = tmp_path / "clip.emb1"
    write_embedding(stack, path)
    loaded = load_embedding(path)
    assert loaded.as_array().tobytes() == stack.as_array().tobytes()
    assert loaded.frame_rate_hz == stack.frame_rate_hz
    assert loaded.t_start_s == stack.t_start_s

    blob = bytearray(path.read_bytes())
    truncated = tmp_path / "truncated.emb1"
    truncated.write_bytes(bytes(blob[:-4]))
    with pytest.raises(Emb1CorruptionError):
        load_embedding(truncated)

    bad_magic = bytearray(blob)
    bad_magic[0:4] = b"XXXX"
    corrupt = tmp_path / "magic.emb1"
    corrupt.write_bytes(bytes(bad_magic))
    with pytest.raises(Emb1FormatError):
        load_embedding(corrupt)

    bad_dims = bytearray(blob)
    struct.pack_into("<I", bad_dims, 12, 0)
    zero = tmp_path / "zero.emb1"
    zero.write_bytes(bytes(bad_dims))
    with pytest.raises(Emb1FormatError):
        load_embedding(zero)
    _report("EMB1 round trip bit-identical; corrupt fixtures raise documented errors")
