"""Shared fixtures: a small corpus and model configs sized for CPU tests."""

import numpy as np
import pytest
import torch

from dubsynth.corpus import CorpusConfig, generate_corpus
from dubsynth.model import ModelConfig, ProsodyTransferModel
from dubsynth.training import MODEL_PHONEMES

torch.set_num_threads(2)

SMALL_SR = 8000
SMALL_CORPUS = dict(
    sample_rate_hz=SMALL_SR,
    frame_length_s=0.032,
    frame_shift_s=0.016,
    n_fft=512,
    n_mels=64,
    silence_s=0.048,
    phoneme_frames=(5, 10),
    phonemes_per_utterance=(3, 5),
)


def small_model_config(**overrides) -> ModelConfig:
    base = dict(
        num_phonemes=len(MODEL_PHONEMES),
        num_speakers=10,
        num_languages=5,
        sample_rate_hz=SMALL_SR,
        n_fft=512,
        hop=128,
        win_length=256,
        text_hidden=64,
        text_layers=1,
        text_heads=2,
        prosody_dim=16,
        noise_dim=8,
        ref_channels=32,
        latent_dim=24,
        posterior_hidden=64,
        flow_hidden=48,
        flow_blocks=2,
        prior_hidden=64,
        decoder_channels=64,
        upsample_rates=(4, 4, 4, 2),
    )
    base.update(overrides)
    return ModelConfig(**base)


def randomize(model: ProsodyTransferModel, seed: int = 0, scale: float = 0.1):
    """Perturb all parameters (zero-initialized heads included) for tests that
    need non-degenerate behavior from an untrained model."""
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for p in model.parameters():
            p.add_(scale * torch.randn(p.shape, generator=gen))
    return model


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_corpus")
    cfg = CorpusConfig(num_utterances=24, snr_range_db=(18.0, 32.0), **SMALL_CORPUS)
    manifest = generate_corpus(cfg, seed=5, out_dir=out)
    return manifest, cfg


@pytest.fixture(scope="session")
def tiny_model():
    torch.manual_seed(0)
    return ProsodyTransferModel(small_model_config())


@pytest.fixture(scope="session")
def tiny_nm_model():
    torch.manual_seed(0)
    return ProsodyTransferModel(small_model_config(noise_modelling=True))


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
