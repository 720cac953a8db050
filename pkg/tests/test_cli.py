"""CLI behavior: subcommands, config precedence, provenance, error format."""

import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from dubsynth.cli import main

TINY_YAML = """\
corpus:
  num_utterances: 14
  sample_rate_hz: 8000
  frame_length_s: 0.032
  frame_shift_s: 0.016
  n_fft: 512
  n_mels: 64
  silence_s: 0.048
  phoneme_frames: [5, 9]
  phonemes_per_utterance: [3, 4]
model:
  text_hidden: 48
  text_layers: 1
  text_heads: 2
  prosody_dim: 8
  noise_dim: 4
  ref_channels: 16
  latent_dim: 16
  posterior_hidden: 48
  flow_hidden: 32
  flow_blocks: 2
  prior_hidden: 48
  decoder_channels: 48
  upsample_rates: [4, 4, 4, 2]
train:
  batch_size: 2
  max_steps: 3
  checkpoint_every: 100
  eval_every: 0
  segment_frames: 10
  stft_resolutions: [[256, 64]]
"""


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Shared tiny end-to-end pipeline artifacts."""
    root = tmp_path_factory.mktemp("cli")
    cfg = root / "cfg.yaml"
    cfg.write_text(TINY_YAML)
    runner = CliRunner()
    r1 = runner.invoke(main, ["generate-corpus", "--config", str(cfg),
                              "--out", str(root / "corpus"), "--seed", "3"])
    assert r1.exit_code == 0, r1.output
    r2 = runner.invoke(main, ["train", "--config", str(cfg),
                              "--manifest", str(root / "corpus" / "manifest.jsonl"),
                              "--out", str(root / "run"), "--seed", "1"])
    assert r2.exit_code == 0, r2.output
    checkpoint = root / "run" / "checkpoint_000003.pt"
    r3 = runner.invoke(main, ["synthesize", "--checkpoint", str(checkpoint),
                              "--manifest", str(root / "corpus" / "manifest.jsonl"),
                              "--out", str(root / "dub"), "--mode", "transfer",
                              "--split", "train", "--limit", "2"])
    assert r3.exit_code == 0, r3.output
    return root, cfg, checkpoint


class TestHelp:
    @pytest.mark.parametrize("command", [[], ["generate-corpus"], ["train"],
                                         ["synthesize"], ["evaluate"],
                                         ["analyze-embeddings"]])
    def test_help_exits_zero(self, runner, command):
        result = runner.invoke(main, command + ["--help"])
        assert result.exit_code == 0
        assert "Usage" in result.output

    def test_console_script_help(self):
        proc = subprocess.run([sys.executable, "-m", "dubsynth.cli", "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0


class TestGenerateCorpus:
    def test_writes_manifest_and_run_info(self, pipeline):
        root, _, _ = pipeline
        assert (root / "corpus" / "manifest.jsonl").exists()
        info = json.loads((root / "corpus" / "run_info.json").read_text())
        assert info["provenance"]["seed"] == 3
        assert info["config"]["corpus"]["num_utterances"] == 14

    def test_flag_overrides_config_file(self, runner, pipeline, tmp_path):
        root, cfg, _ = pipeline
        result = runner.invoke(main, ["generate-corpus", "--config", str(cfg),
                                      "--out", str(tmp_path / "c2"), "--seed", "3",
                                      "--utterances", "12"])
        assert result.exit_code == 0, result.output
        lines = (tmp_path / "c2" / "manifest.jsonl").read_text().splitlines()
        assert len(lines) == 13  # header + 12 records
        info = json.loads((tmp_path / "c2" / "run_info.json").read_text())
        assert info["config"]["corpus"]["num_utterances"] == 12

    def test_rerun_identical_manifest(self, runner, pipeline, tmp_path):
        root, cfg, _ = pipeline
        for sub in ("r1", "r2"):
            result = runner.invoke(main, ["generate-corpus", "--config", str(cfg),
                                          "--out", str(tmp_path / sub), "--seed", "9"])
            assert result.exit_code == 0
        assert (tmp_path / "r1" / "manifest.jsonl").read_bytes() == \
            (tmp_path / "r2" / "manifest.jsonl").read_bytes()

    def test_unknown_flag_rejected(self, runner):
        result = runner.invoke(main, ["generate-corpus", "--frobnicate"])
        assert result.exit_code != 0

    def test_bad_config_single_line_error(self, runner, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("nonsense_section:\n  a: 1\n")
        result = runner.invoke(main, ["generate-corpus", "--config", str(bad),
                                      "--out", str(tmp_path / "x")])
        assert result.exit_code == 1
        err_lines = [l for l in result.output.splitlines() if l.startswith("error:")]
        assert len(err_lines) == 1


class TestTrainCli:
    def test_checkpoint_and_metrics_written(self, pipeline):
        root, _, checkpoint = pipeline
        assert checkpoint.exists()
        log = root / "run" / "metrics.jsonl"
        rows = [json.loads(l) for l in log.read_text().splitlines()]
        assert sum(r["kind"] == "train" for r in rows) == 3
        info = json.loads((root / "run" / "run_info.json").read_text())
        assert "manifest_digest" in info["provenance"]

    def test_variant_flag_must_match_model(self, runner, pipeline, tmp_path):
        root, cfg, _ = pipeline
        result = runner.invoke(main, ["train", "--config", str(cfg),
                                      "--manifest",
                                      str(root / "corpus" / "manifest.jsonl"),
                                      "--out", str(tmp_path), "--variant", "vipt-nm",
                                      "--steps", "1"])
        # vipt-nm flips noise_modelling on automatically; should succeed
        assert result.exit_code == 0, result.output


class TestSynthesizeCli:
    def test_outputs_and_diagnostics(self, pipeline):
        root, _, _ = pipeline
        manifest_lines = (root / "dub" / "manifest.jsonl").read_text().splitlines()
        assert len(manifest_lines) == 3  # header + 2 outputs
        diags = [json.loads(l) for l in
                 (root / "dub" / "diagnostics.jsonl").read_text().splitlines()]
        assert all("output_snr_db" in d for d in diags)
        info = json.loads((root / "dub" / "run_info.json").read_text())
        assert "checkpoint_digest" in info["provenance"]

    def test_missing_checkpoint_single_line_error(self, runner, pipeline, tmp_path):
        root, _, _ = pipeline
        result = runner.invoke(main, ["synthesize", "--checkpoint",
                                      str(tmp_path / "none.pt"),
                                      "--manifest",
                                      str(root / "corpus" / "manifest.jsonl")])
        assert result.exit_code != 0


class TestEvaluateCli:
    def test_reports_written_for_alignable_outputs(self, runner, pipeline):
        # corpus evaluated against itself: guaranteed-voiced audio exercises
        # the full F0 + SNR reporting path
        root, _, _ = pipeline
        result = runner.invoke(main, ["evaluate",
                                      "--outputs", str(root / "corpus" / "manifest.jsonl"),
                                      "--references",
                                      str(root / "corpus" / "manifest.jsonl"),
                                      "--out", str(root / "eval")])
        assert result.exit_code == 0, result.output
        assert (root / "eval" / "f0_metrics.jsonl").exists()
        assert (root / "eval" / "snr_report.jsonl").exists()
        assert "Correlation" in result.output

    def test_unvoiced_outputs_fail_with_single_line_error(self, runner, pipeline):
        # a 3-step model emits noise with no voiced frames: a hard error
        root, _, _ = pipeline
        result = runner.invoke(main, ["evaluate",
                                      "--outputs", str(root / "dub" / "manifest.jsonl"),
                                      "--references",
                                      str(root / "corpus" / "manifest.jsonl"),
                                      "--metric", "f0",
                                      "--out", str(root / "eval_bad")])
        assert result.exit_code == 1
        assert result.output.count("error:") == 1

    def test_snr_only(self, runner, pipeline):
        root, _, _ = pipeline
        result = runner.invoke(main, ["evaluate",
                                      "--outputs", str(root / "dub" / "manifest.jsonl"),
                                      "--references",
                                      str(root / "corpus" / "manifest.jsonl"),
                                      "--metric", "snr",
                                      "--out", str(root / "eval_snr")])
        assert result.exit_code == 0, result.output
        assert not (root / "eval_snr" / "f0_metrics.jsonl").exists()


class TestAnalyzeEmbeddingsCli:
    def test_too_small_corpus_gives_clean_error(self, runner, pipeline, tmp_path):
        root, _, checkpoint = pipeline
        result = runner.invoke(main, ["analyze-embeddings",
                                      "--checkpoint", str(checkpoint),
                                      "--manifest",
                                      str(root / "corpus" / "manifest.jsonl"),
                                      "--out", str(tmp_path)])
        # 14 utterances over 5 languages cannot satisfy the 10-per-language rule
        assert result.exit_code == 1
        assert "error:" in result.output
