import wave

import numpy as np
import pytest
import torch

SAMPLE_RATE = 16000


def write_wav(path, samples, rate=SAMPLE_RATE):
    pcm = np.clip(np.rint(np.asarray(samples, dtype=np.float64) * 32767.0), -32768, 32767)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.astype("<i2").tobytes())


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory):
    """A small randomly initialized wav2vec2-style checkpoint saved locally,
    so export runs the real from_pretrained path without any downloads."""
    from transformers import Wav2Vec2Config, Wav2Vec2Model

    config = Wav2Vec2Config(
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        conv_dim=(16, 16, 16, 16, 16, 16, 16),
        num_feat_extract_layers=7,
        num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=4,
    )
    torch.manual_seed(1234)
    model = Wav2Vec2Model(config)
    path = tmp_path_factory.mktemp("ckpt") / "tiny-stack"
    model.save_pretrained(path)
    return path


@pytest.fixture(scope="session")
def audio_dir(tmp_path_factory):
    """Three one-second clips: silence, a tone, and seeded noise."""
    rng = np.random.default_rng(7)
    root = tmp_path_factory.mktemp("audio")
    t = np.arange(SAMPLE_RATE) / SAMPLE_RATE
    write_wav(root / "silence.wav", np.zeros(SAMPLE_RATE))
    write_wav(root / "tone.wav", 0.5 * np.sin(2 * np.pi * 440.0 * t))
    write_wav(root / "noise.wav", rng.uniform(-0.5, 0.5, SAMPLE_RATE))
    return root
