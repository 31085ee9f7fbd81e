import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from embfuse import (
    ConfigError,
    FusionConfig,
    LayerStack,
    SceneEmbedder,
    ShallowProbe,
    average_features,
    fuse,
    last_layer,
    layer_aggregate,
    named_variant,
    resample,
    scene_embed,
)


def make_stack(rng, layers, t, c, rate=50.0, start=0.0125):
    return LayerStack(tuple(rng.normal(size=(t, c)) for _ in range(layers)), rate, start)


def test_config_validation():
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=())
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=("a", "a"))
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=("a",), reference_member="b")
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=("a",), combine="sum")
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=("a",), scene_mode="max")
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=("a", "b"), aggregate_layers=(True,))
    with pytest.raises(ConfigError):
        FusionConfig(member_ids=("a",), group_count=0)


def test_config_broadcast_and_defaults():
    cfg = FusionConfig(member_ids=("a", "b"), aggregate_layers=True)
    assert cfg.aggregate_layers == (True, True)
    assert cfg.reference_member == "a"
    assert cfg.group_count == 5


def test_config_dict_round_trip():
    cfg = FusionConfig(member_ids=("x", "y"), combine="average", scene_mode="grouped")
    again = FusionConfig.from_dict(cfg.to_dict())
    assert again == cfg
    with pytest.raises(ConfigError):
        FusionConfig.from_dict({"member_ids": ["a"], "bogus": 1})


def test_fuse_single_member_last_layer():
    rng = np.random.default_rng(0)
    st = make_stack(rng, 3, 6, 4)
    cfg = FusionConfig(member_ids=("m",), aggregate_layers=False)
    out = fuse({"m": st}, cfg)
    np.testing.assert_array_equal(out.data, st.layers[-1])


def test_fuse_missing_member_raises():
    cfg = FusionConfig(member_ids=("m", "n"))
    rng = np.random.default_rng(1)
    with pytest.raises(KeyError):
        fuse({"m": make_stack(rng, 1, 4, 3)}, cfg)


def test_fuse_three_member_shape_contract():
    # three heterogeneous members aligned to a 49x1024 reference concatenate
    # to 49x3072
    rng = np.random.default_rng(2)
    stacks = {
        "big": make_stack(rng, 2, 49, 1024, rate=50.0),
        "wide": make_stack(rng, 3, 49, 1280, rate=50.0),
        "fast": make_stack(rng, 1, 99, 256, rate=100.0),
    }
    cfg = FusionConfig(member_ids=("big", "wide", "fast"), reference_member="big")
    out = fuse(stacks, cfg)
    assert out.shape == (49, 3072)
    assert out.frame_rate_hz == stacks["big"].frame_rate_hz
    assert out.t_start_s == stacks["big"].t_start_s


def test_fuse_average_matches_manual_composition():
    rng = np.random.default_rng(3)
    stacks = {
        "a": make_stack(rng, 2, 12, 6, rate=40.0, start=0.01),
        "b": make_stack(rng, 3, 20, 9, rate=80.0, start=0.02),
    }
    cfg = FusionConfig(member_ids=("a", "b"), combine="average", reference_member="a")
    out = fuse(stacks, cfg)
    ref = layer_aggregate(stacks["a"])
    other = resample(layer_aggregate(stacks["b"]), 12, 6).with_timing(
        ref.frame_rate_hz, ref.t_start_s
    )
    expected = average_features([ref, other])
    np.testing.assert_array_equal(out.data, expected.data)


def test_fuse_deterministic():
    rng = np.random.default_rng(4)
    stacks = {"a": make_stack(rng, 2, 8, 4), "b": make_stack(rng, 1, 16, 6, rate=100.0)}
    cfg = FusionConfig(member_ids=("a", "b"))
    one = fuse(stacks, cfg)
    two = fuse(stacks, cfg)
    assert one.data.tobytes() == two.data.tobytes()


def test_fuse_mixed_aggregation_flags():
    rng = np.random.default_rng(5)
    stacks = {"a": make_stack(rng, 3, 6, 4), "b": make_stack(rng, 2, 6, 4)}
    cfg = FusionConfig(member_ids=("a", "b"), aggregate_layers=(True, False))
    out = fuse(stacks, cfg)
    np.testing.assert_array_equal(out.data[:, :4], layer_aggregate(stacks["a"]).data)
    np.testing.assert_array_equal(out.data[:, 4:], last_layer(stacks["b"]).data)


def test_scene_embed_modes():
    rng = np.random.default_rng(6)
    st = make_stack(rng, 1, 10, 4)
    seq = last_layer(st)
    mean_cfg = FusionConfig(member_ids=("m",), scene_mode="mean")
    grouped_cfg = FusionConfig(member_ids=("m",), scene_mode="grouped", group_count=5)
    assert scene_embed(seq, mean_cfg).length == 4
    assert scene_embed(seq, grouped_cfg).length == 20
    one_group = FusionConfig(member_ids=("m",), scene_mode="grouped", group_count=1)
    np.testing.assert_array_equal(
        scene_embed(seq, one_group).values, scene_embed(seq, mean_cfg).values
    )


def test_scene_embed_constant_sequence():
    seq = last_layer(LayerStack((np.tile([2.0, -3.0], (7, 1)),), 10.0, 0.0))
    cfg = FusionConfig(member_ids=("m",))
    np.testing.assert_array_equal(
        scene_embed(seq, cfg).values, np.array([2.0, -3.0], np.float32)
    )


def test_scene_grouped_contract_width():
    rng = np.random.default_rng(7)
    seq = last_layer(make_stack(rng, 1, 49, 3072))
    cfg = FusionConfig(member_ids=("m",), scene_mode="grouped", group_count=5)
    assert scene_embed(seq, cfg).length == 15360


def test_named_variants():
    cfg = named_variant("last_layer_single", ["a"])
    assert cfg.aggregate_layers == (False,)
    cfg = named_variant("fusion_single", ["a"])
    assert cfg.aggregate_layers == (True,)
    cfg = named_variant("avg_pair", ["a", "b"])
    assert cfg.combine == "average"
    cfg = named_variant("cat_triple_grouped", ["a", "b", "c"], group_count=5)
    assert cfg.scene_mode == "grouped" and cfg.group_count == 5
    with pytest.raises(ConfigError):
        named_variant("cat_pair", ["a"])
    with pytest.raises(ConfigError):
        named_variant("nope", ["a"])


def test_grouping_commutes_with_concat_for_concat_fusion():
    # pooling is per-channel, so grouping aligned members before or after
    # concatenation yields the same scene vector
    rng = np.random.default_rng(8)
    stacks = {"a": make_stack(rng, 1, 20, 3), "b": make_stack(rng, 1, 35, 5, rate=87.5)}
    cfg = FusionConfig(member_ids=("a", "b"), scene_mode="grouped", group_count=4)
    after = scene_embed(fuse(stacks, cfg), cfg)
    aligned = [last_layer(stacks["a"]), resample(last_layer(stacks["b"]), 20, 3)]
    per_member = [scene_embed(m, cfg) for m in aligned]
    k, w = 4, 3
    pieces = []
    for g in range(k):
        for m in per_member:
            pieces.append(m.values[g * w : (g + 1) * w])
    np.testing.assert_array_equal(after.values, np.concatenate(pieces))


def test_scene_embedder_estimator():
    rng = np.random.default_rng(9)
    clips = [
        {"a": make_stack(rng, 2, 8, 4), "b": make_stack(rng, 1, 12, 6, rate=75.0)}
        for _ in range(5)
    ]
    emb = SceneEmbedder(member_ids=("a", "b"), scene_mode="grouped", group_count=2)
    params = emb.get_params()
    assert params["group_count"] == 2
    cloned = clone(emb)
    out = cloned.fit(clips).transform(clips)
    assert out.shape == (5, 2 * 8)
    again = SceneEmbedder(**params).transform(clips)
    np.testing.assert_array_equal(out, again)


def test_scene_embedder_in_pipeline():
    rng = np.random.default_rng(10)
    clips = [{"a": make_stack(rng, 1, 10, 6)} for _ in range(12)]
    # separable toy labels from the first pooled channel
    emb = SceneEmbedder(member_ids=("a",))
    X = emb.transform(clips)
    y = (X[:, 0] > np.median(X[:, 0])).astype(int)
    y[np.argsort(X[:, 0])[: len(y) // 2]] = 0
    pipe = Pipeline(
        [
            ("embed", SceneEmbedder(member_ids=("a",))),
            ("probe", ShallowProbe(learning_rate=0.5, epochs=120, batch_size=12, seed=0)),
        ]
    )
    pipe.fit(clips, y)
    assert pipe.predict(clips).shape == (12,)
