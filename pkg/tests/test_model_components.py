"""Contract tests for the network submodules (untrained models)."""

import numpy as np
import pytest
import torch

from dubsynth.model import ConditioningBundle, GaussianEmbedding, ProsodyTransferModel

from conftest import randomize, small_model_config


def make_batch(model, batch_size=2, frames=30, phonemes=4, seed=0, with_noise=None):
    torch.manual_seed(seed)
    cfg = model.config
    if with_noise is None:
        with_noise = cfg.noise_modelling
    per_ph = frames // phonemes
    durations = torch.full((batch_size, phonemes), per_ph, dtype=torch.long)
    durations[:, -1] += frames - per_ph * phonemes
    batch = {
        "phoneme_ids": torch.randint(0, cfg.num_phonemes, (batch_size, phonemes)),
        "phoneme_lengths": torch.full((batch_size,), phonemes, dtype=torch.long),
        "durations": durations,
        "linear_spec": torch.rand(batch_size, cfg.linear_bins, frames),
        "spec_lengths": torch.full((batch_size,), frames, dtype=torch.long),
        "waveform": 0.1 * torch.rand(batch_size, frames * cfg.hop),
        "prosody_ref": torch.rand(batch_size, cfg.linear_bins, frames),
        "prosody_ref_lengths": torch.full((batch_size,), frames, dtype=torch.long),
        "speaker_ids": torch.arange(batch_size) % cfg.num_speakers,
        "language_ids": torch.arange(batch_size) % cfg.num_languages,
    }
    if with_noise:
        batch["noise_ref"] = 0.01 * torch.rand(batch_size, cfg.linear_bins, frames)
        batch["noise_ref_lengths"] = torch.full((batch_size,), frames, dtype=torch.long)
    return batch


class TestReferenceEncoders:
    def test_deterministic_mode_sample_equals_mean(self, tiny_model):
        spec = torch.rand(2, tiny_model.config.linear_bins, 25)
        lengths = torch.tensor([25, 20])
        emb = tiny_model.prosody_encode(spec, lengths, deterministic=True)
        assert torch.equal(emb.sample, emb.mean)

    def test_output_shape_is_embedding_dim(self, tiny_model):
        cfg = tiny_model.config
        spec = torch.rand(3, cfg.linear_bins, 17)
        emb = tiny_model.prosody_encode(spec, torch.tensor([17, 10, 5]))
        assert emb.mean.shape == (3, cfg.prosody_dim)
        assert emb.log_variance.shape == (3, cfg.prosody_dim)
        assert emb.sample.shape == (3, cfg.prosody_dim)

    def test_length_agnostic_single_code(self, tiny_model):
        cfg = tiny_model.config
        for frames in (1, 7, 80):
            spec = torch.rand(1, cfg.linear_bins, frames)
            emb = tiny_model.prosody_encode(spec, torch.tensor([frames]))
            assert emb.mean.shape == (1, cfg.prosody_dim)

    def test_zero_initialized_heads_give_standard_normal_stats(self, tiny_model):
        spec = torch.rand(2, tiny_model.config.linear_bins, 12)
        emb = tiny_model.prosody_encode(spec, torch.tensor([12, 12]), deterministic=True)
        assert torch.all(emb.mean == 0)
        assert torch.all(emb.log_variance == 0)

    def test_zero_magnitude_residual_is_finite(self, tiny_nm_model):
        model = randomize(ProsodyTransferModel(tiny_nm_model.config), seed=3)
        spec = torch.zeros(1, model.config.linear_bins, 20)
        emb = model.noise_encode(spec, torch.tensor([20]))
        assert torch.isfinite(emb.mean).all()
        assert torch.isfinite(emb.log_variance).all()
        assert torch.isfinite(emb.sample).all()

    def test_reparameterization_identity(self, tiny_model):
        model = randomize(ProsodyTransferModel(tiny_model.config), seed=4)
        spec = torch.rand(2, model.config.linear_bins, 15)
        torch.manual_seed(9)
        emb = model.prosody_encode(spec, torch.tensor([15, 15]))
        rebuilt = emb.mean + torch.exp(0.5 * emb.log_variance) * emb.epsilon
        assert torch.allclose(emb.sample, rebuilt)

    def test_empty_spectrogram_rejected(self, tiny_model):
        spec = torch.zeros(1, tiny_model.config.linear_bins, 0)
        with pytest.raises(ValueError, match="at least one frame"):
            tiny_model.prosody_encode(spec, torch.tensor([0]))

    def test_conv_stack_depth_and_kernel(self, tiny_model):
        encoder = tiny_model.prosody_encoder
        assert len(encoder.convs) == 5
        assert all(c.kernel_size == (3,) for c in encoder.convs)


class TestTextEncoder:
    def test_zero_conditioning_equals_absent_conditioning(self, tiny_model):
        # the projection is bias-free, so a zero conditioning vector is inert
        model = tiny_model.eval()
        cfg = model.config
        ids = torch.randint(0, cfg.num_phonemes, (2, 6))
        lengths = torch.tensor([6, 4])
        prosody = GaussianEmbedding.point(torch.zeros(2, cfg.prosody_dim))
        bundle = ConditioningBundle(torch.zeros(2, dtype=torch.long),
                                    torch.zeros(2, dtype=torch.long), prosody)
        with torch.no_grad():
            with_bundle = model.text_encode(ids, lengths, bundle)
            without = model.text_encode(ids, lengths, None)
        assert torch.equal(with_bundle, without)

    def test_zeroed_projection_makes_output_embedding_independent(self):
        torch.manual_seed(3)
        model = ProsodyTransferModel(small_model_config()).eval()
        with torch.no_grad():
            model.text_encoder.conditioning_proj.weight.zero_()
        cfg = model.config
        ids = torch.randint(0, cfg.num_phonemes, (1, 7))
        lengths = torch.tensor([7])
        speaker = torch.zeros(1, dtype=torch.long)
        a = GaussianEmbedding.point(torch.randn(1, cfg.prosody_dim))
        b = GaussianEmbedding.point(torch.randn(1, cfg.prosody_dim))
        with torch.no_grad():
            out_a = model.text_encode(ids, lengths, ConditioningBundle(speaker, speaker, a))
            out_b = model.text_encode(ids, lengths, ConditioningBundle(speaker, speaker, b))
        assert torch.equal(out_a, out_b)

    def test_output_length_matches_input(self, tiny_model):
        cfg = tiny_model.config
        ids = torch.randint(0, cfg.num_phonemes, (1, 9))
        out = tiny_model.text_encode(ids, torch.tensor([9]))
        assert out.shape == (1, 9, cfg.text_hidden)

    def test_perturbing_prosody_changes_hidden_states(self):
        model = randomize(ProsodyTransferModel(small_model_config()), seed=7).eval()
        cfg = model.config
        ids = torch.randint(0, cfg.num_phonemes, (1, 5))
        lengths = torch.tensor([5])
        base = GaussianEmbedding.point(torch.zeros(1, cfg.prosody_dim))
        shifted = GaussianEmbedding.point(torch.ones(1, cfg.prosody_dim))
        speaker = torch.zeros(1, dtype=torch.long)
        with torch.no_grad():
            a = model.text_encode(ids, lengths, ConditioningBundle(speaker, speaker, base))
            b = model.text_encode(ids, lengths, ConditioningBundle(speaker, speaker, shifted))
        assert (a - b).abs().max() > 0

    def test_out_of_vocabulary_phoneme_rejected(self, tiny_model):
        ids = torch.tensor([[0, tiny_model.config.num_phonemes + 3]])
        with pytest.raises(ValueError, match="out of vocabulary"):
            tiny_model.text_encode(ids, torch.tensor([2]))


class TestDurationsAndPrior:
    def test_predictions_clamp_at_one_frame(self, tiny_model):
        cfg = tiny_model.config
        log_d = torch.full((1, 4), -5.0)  # expm1 -> negative
        mask = torch.ones(1, 4, dtype=torch.bool)
        frames = tiny_model.duration_predictor.to_frames(log_d, mask)
        assert torch.all(frames >= 1)

    def test_duration_loss_zero_when_exact(self, tiny_model):
        target = torch.tensor([[3, 5, 2]])
        mask = torch.ones(1, 3)
        pred = torch.log1p(target.float())
        loss = tiny_model.duration_predictor.loss(pred, target, mask)
        assert float(loss) == pytest.approx(0.0, abs=1e-12)

    def test_frame_prior_length_contract(self, tiny_model):
        cfg = tiny_model.config
        hidden = torch.rand(2, 5, cfg.text_hidden)
        durations = torch.tensor([[2, 3, 1, 4, 2], [5, 1, 1, 1, 0]])
        m_p, logs_p, frame_lengths = tiny_model.frame_prior(hidden, durations)
        assert m_p.shape == (2, cfg.latent_dim, 12)
        assert frame_lengths.tolist() == [12, 8]

    def test_upsampling_is_blockwise_constant(self, tiny_model):
        from dubsynth.model.modules import length_regulate

        hidden = torch.rand(1, 3, 4)
        durations = torch.tensor([[2, 2, 2]])
        up, lengths = length_regulate(hidden, durations)
        assert lengths.tolist() == [6]
        assert torch.equal(up[0, 0], up[0, 1])
        assert torch.equal(up[0, 2], up[0, 3])
        assert torch.equal(up[0, 4], up[0, 5])

    def test_duration_hidden_mismatch_rejected(self, tiny_model):
        hidden = torch.rand(1, 4, tiny_model.config.text_hidden)
        with pytest.raises(ValueError, match="phonemes"):
            tiny_model.frame_prior(hidden, torch.ones(1, 5, dtype=torch.long))


class TestPosteriorAndDecoder:
    def test_posterior_preserves_frames(self, tiny_model):
        cfg = tiny_model.config
        spec = torch.rand(2, cfg.linear_bins, 33)
        g = tiny_model.global_conditioning(torch.tensor([0, 1]), torch.tensor([0, 1]))
        m, logs, z = tiny_model.posterior_encode(spec, torch.tensor([33, 30]), g)
        assert m.shape == (2, cfg.latent_dim, 33)
        assert z.shape == m.shape

    def test_posterior_deterministic_mode(self, tiny_model):
        cfg = tiny_model.config
        spec = torch.rand(1, cfg.linear_bins, 10)
        g = tiny_model.global_conditioning(torch.tensor([0]), torch.tensor([0]))
        m, _, z = tiny_model.posterior_encode(spec, torch.tensor([10]), g,
                                              deterministic=True)
        assert torch.equal(z, m)

    def test_decoder_length_contract(self, tiny_model):
        cfg = tiny_model.config
        z = torch.rand(1, cfg.latent_dim, 11)
        g = tiny_model.global_conditioning(torch.tensor([0]), torch.tensor([0]))
        wav = tiny_model.decode(z, g)
        assert wav.shape == (1, 1, 11 * cfg.hop)
        assert torch.isfinite(wav).all()

    def test_silence_latent_gives_near_zero_output(self):
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())  # untrained
        with torch.no_grad():  # zero-init output layer for this check
            model.decoder.post.weight.zero_()
            model.decoder.post.bias.zero_()
        z = torch.zeros(1, model.config.latent_dim, 8)
        g = model.global_conditioning(torch.tensor([0]), torch.tensor([0]))
        wav = model.decode(z, g)
        assert wav.abs().max() < 1e-6

    def test_empty_latent_rejected(self, tiny_model):
        z = torch.zeros(1, tiny_model.config.latent_dim, 0)
        g = tiny_model.global_conditioning(torch.tensor([0]), torch.tensor([0]))
        with pytest.raises(ValueError, match="empty latent"):
            tiny_model.decode(z, g)


class TestForwardTrain:
    def test_loss_pieces_finite_on_first_batch(self, tiny_model):
        batch = make_batch(tiny_model)
        out = tiny_model.forward_train(batch, segment_frames=12)
        assert torch.isfinite(out["kl"])
        assert torch.isfinite(out["duration_loss"])
        assert torch.isfinite(out["waveform_segments"]).all()

    def test_prosody_kld_zero_at_initialization(self):
        from dubsynth.training import batch_kld

        torch.manual_seed(1)
        model = ProsodyTransferModel(small_model_config())
        batch = make_batch(model)
        out = model.forward_train(batch, segment_frames=12)
        kld = batch_kld(out["prosody"].mean, out["prosody"].log_variance).detach()
        assert float(kld) == pytest.approx(0.0, abs=1e-12)

    def test_nm_variant_zero_noise_record_is_finite(self, tiny_nm_model):
        model = randomize(ProsodyTransferModel(tiny_nm_model.config), seed=11)
        batch = make_batch(model)
        batch["noise_ref"] = torch.zeros_like(batch["noise_ref"])
        out = model.forward_train(batch, segment_frames=12)
        assert torch.isfinite(out["noise"].mean).all()
        assert torch.isfinite(out["kl"])

    def test_nm_variant_without_residual_rejected(self, tiny_nm_model):
        batch = make_batch(tiny_nm_model, with_noise=False)
        with pytest.raises(ValueError, match="residual stream"):
            tiny_nm_model.forward_train(batch, segment_frames=12)

    def test_parameter_budget_default_config(self):
        from dubsynth.model import ModelConfig

        model = ProsodyTransferModel(ModelConfig(num_phonemes=21, num_speakers=10,
                                                 num_languages=5))
        total = model.parameter_counts()["total"]
        assert 5_000_000 <= total <= 15_000_000

    def test_deterministic_inference_is_pure(self, tiny_model):
        model = randomize(ProsodyTransferModel(tiny_model.config), seed=21).eval()
        cfg = model.config
        ids = torch.randint(0, cfg.num_phonemes, (1, 5))
        lengths = torch.tensor([5])
        bundle = ConditioningBundle(
            torch.tensor([1]), torch.tensor([2]),
            GaussianEmbedding.point(0.3 * torch.ones(1, cfg.prosody_dim)))
        a = model.infer(ids, lengths, bundle, deterministic=True)
        b = model.infer(ids, lengths, bundle, deterministic=True)
        assert torch.equal(a["waveform"], b["waveform"])
        assert torch.equal(a["durations"], b["durations"])
