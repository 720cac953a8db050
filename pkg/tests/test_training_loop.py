"""Training loop behavior: determinism, resume, checkpoints, logging."""

import json

import pytest
import torch

from dubsynth.model import ProsodyTransferModel
from dubsynth.training import (
    TrainConfig,
    build_model,
    check_config_compatible,
    load_checkpoint,
    save_checkpoint,
    train,
)

from conftest import small_model_config

SMALL_RESOLUTIONS = ((512, 128), (256, 64))


def small_train_config(**overrides):
    base = dict(batch_size=3, max_steps=8, checkpoint_every=4, eval_every=0,
                segment_frames=12, seed=0, stft_resolutions=SMALL_RESOLUTIONS)
    base.update(overrides)
    return TrainConfig(**base)


def read_log(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


class TestTrainLoop:
    def test_zero_steps_returns_initial_checkpoint_unchanged(self, tiny_corpus, tmp_path):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())
        before = {k: v.clone() for k, v in model.state_dict().items()}
        result = train(model, manifest, small_train_config(max_steps=0), tmp_path)
        assert result.final_step == 0
        payload = load_checkpoint(result.final_checkpoint)
        for key, value in before.items():
            assert torch.equal(payload["model_state"][key], value)

    def test_loss_logged_every_step_with_exact_additivity(self, tiny_corpus, tmp_path):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())
        result = train(model, manifest, small_train_config(max_steps=8), tmp_path)
        rows = [r for r in read_log(result.metric_log) if r["kind"] == "train"]
        assert [r["step"] for r in rows] == list(range(8))
        for row in rows:
            vits_sum = (row["l_vits_recon"] + row["l_vits_kl"] + row["l_vits_duration"]
                        + row["l_vits_adv"] + row["l_vits_featmatch"])
            expected = (vits_sum + row["alpha1"] * row["l_prosody_kld"]
                        + row["alpha2"] * row["l_noise_kld"])
            assert abs(row["l_total"] - expected) <= 1e-6 * max(abs(expected), 1.0)

    def test_resume_matches_uninterrupted_run(self, tiny_corpus, tmp_path):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model_full = ProsodyTransferModel(small_model_config())
        full = train(model_full, manifest, small_train_config(max_steps=8),
                     tmp_path / "full")

        torch.manual_seed(0)
        model_resumed = ProsodyTransferModel(small_model_config())
        part = train(model_resumed, manifest, small_train_config(max_steps=4),
                     tmp_path / "part")
        resumed = train(model_resumed, manifest, small_train_config(max_steps=8),
                        tmp_path / "resumed", resume_from=part.final_checkpoint)

        full_rows = {r["step"]: r for r in read_log(full.metric_log) if r["kind"] == "train"}
        res_rows = {r["step"]: r for r in read_log(resumed.metric_log) if r["kind"] == "train"}
        for step in range(4, 8):
            a, b = full_rows[step]["l_total"], res_rows[step]["l_total"]
            assert abs(a - b) <= 1e-4 * max(abs(a), 1.0)

        final_full = load_checkpoint(full.final_checkpoint)["model_state"]
        final_res = load_checkpoint(resumed.final_checkpoint)["model_state"]
        for key in final_full:
            assert torch.allclose(final_full[key], final_res[key], atol=1e-5), key

    def test_nan_loss_aborts_with_batch_ids(self, tiny_corpus, tmp_path, monkeypatch):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())
        original = model.forward_train

        def poisoned(batch, segment_frames=24):
            out = original(batch, segment_frames)
            out["kl"] = out["kl"] * float("nan")
            return out

        monkeypatch.setattr(model, "forward_train", poisoned)
        with pytest.raises(RuntimeError, match="offending batch ids"):
            train(model, manifest, small_train_config(max_steps=2), tmp_path)

    def test_checkpoint_cadence(self, tiny_corpus, tmp_path):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())
        result = train(model, manifest,
                       small_train_config(max_steps=8, checkpoint_every=4), tmp_path)
        names = sorted(p.name for p in result.checkpoints)
        assert names == ["checkpoint_000004.pt", "checkpoint_000008.pt"]

    def test_smoke_training_reduces_reconstruction(self, tiny_corpus, tmp_path):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())
        result = train(model, manifest, small_train_config(max_steps=40,
                                                           checkpoint_every=40),
                       tmp_path)
        rows = [r for r in read_log(result.metric_log) if r["kind"] == "train"]
        first = sum(r["l_vits_recon"] for r in rows[:4]) / 4
        last = sum(r["l_vits_recon"] for r in rows[-4:]) / 4
        assert last < first


class TestCheckpointRoundTrip:
    def test_save_load_bit_exact(self, tiny_model, tmp_path):
        path = save_checkpoint(tmp_path / "model.pt", tiny_model, step=7)
        payload = load_checkpoint(path)
        rebuilt = build_model(payload)
        for key, value in tiny_model.state_dict().items():
            assert torch.equal(rebuilt.state_dict()[key], value)
        assert payload["step"] == 7

    def test_corrupted_file_rejected(self, tmp_path):
        bad = tmp_path / "bad.pt"
        bad.write_bytes(b"definitely not a checkpoint")
        with pytest.raises(ValueError, match="corrupted or unreadable"):
            load_checkpoint(bad)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_checkpoint(tmp_path / "absent.pt")

    def test_config_mismatch_names_field(self, tiny_model, tmp_path):
        path = save_checkpoint(tmp_path / "model.pt", tiny_model)
        payload = load_checkpoint(path)
        other = small_model_config(prosody_dim=tiny_model.config.prosody_dim * 2)
        with pytest.raises(ValueError, match="prosody_dim"):
            check_config_compatible(other, payload)

    def test_optimizer_state_round_trip(self, tiny_corpus, tmp_path):
        manifest, _ = tiny_corpus
        torch.manual_seed(0)
        model = ProsodyTransferModel(small_model_config())
        result = train(model, manifest, small_train_config(max_steps=2), tmp_path)
        payload = load_checkpoint(result.final_checkpoint)
        assert payload["optimizer_state"] is not None
        assert payload["extra"]["variant"] == "vipt"
        assert payload["extra"]["speakers"] == manifest.speakers()
