"""Command-line entry point: corpus generation, training, synthesis, evaluation."""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click
import numpy as np
import torch

from . import configfile
from .corpus import Manifest, augment_with_clean, generate_corpus
from .corpus.manifest import config_digest
from .evaluation import (
    collect_prosody_embeddings,
    compare_systems,
    language_clustering_score,
    project_embeddings,
    snr_report,
)
from .inference import Synthesizer, batch_dub, compute_speaker_centroid
from .signal import estimate_f0, read_wav
from .signal.spectrogram import FrameConfig
from .training import build_model, checkpoint_digest, load_checkpoint, train
from .training.loop import TrainConfig

OUT_ROOT_ENV = "DUBSYNTH_OUT_ROOT"


def _out_root() -> Path:
    return Path(os.environ.get(OUT_ROOT_ENV, "runs"))


def fail_cleanly(fn):
    """Uncaught errors become one machine-parsable line and a nonzero exit."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
def main():
    """Cross-lingual noise-robust prosody transfer: full pipeline tools."""


@main.command("generate-corpus")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML config with a `corpus` section.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--utterances", type=int, default=None)
@click.option("--languages", type=int, default=None)
@click.option("--speakers-per-language", type=int, default=None)
@click.option("--clean", is_flag=True, default=None,
              help="Render without noise and flag records is_clean.")
@fail_cleanly
def cmd_generate_corpus(config_path, out_dir, seed, utterances, languages,
                        speakers_per_language, clean):
    """Render a synthetic corpus and write its manifest."""
    file_cfg = configfile.load_config_file(config_path)
    cfg = configfile.corpus_config(
        file_cfg, num_utterances=utterances, num_languages=languages,
        speakers_per_language=speakers_per_language, clean=clean)
    out = Path(out_dir) if out_dir else _out_root() / "corpus"
    manifest = generate_corpus(cfg, seed=seed, out_dir=out)
    configfile.write_effective_config(out, {"corpus": cfg},
                                      provenance={"seed": seed})
    click.echo(f"wrote {len(manifest)} records to {out / 'manifest.jsonl'}")


@main.command("train")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--variant", type=click.Choice(["vipt", "vipt-nm"]), default=None)
@click.option("--steps", type=int, default=None, help="Override max training steps.")
@click.option("--batch-size", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--alpha1", type=float, default=None, help="Prosody KLD coefficient.")
@click.option("--alpha2", type=float, default=None, help="Noise KLD coefficient.")
@click.option("--adversarial/--no-adversarial", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--checkpoint-every", type=int, default=None)
@click.option("--clean-manifest", type=click.Path(exists=True), default=None,
              help="Clean corpus manifest merged in for augmentation.")
@click.option("--clean-ratio", type=float, default=None)
@click.option("--resume", "resume_path", type=click.Path(exists=True), default=None)
@fail_cleanly
def cmd_train(config_path, manifest_path, out_dir, variant, steps, batch_size,
              learning_rate, alpha1, alpha2, adversarial, seed, checkpoint_every,
              clean_manifest, clean_ratio, resume_path):
    """Train a model on a corpus manifest."""
    file_cfg = configfile.load_config_file(config_path)
    manifest = Manifest.read(manifest_path)
    corpus_cfg = None
    if "corpus_config" in manifest.header_extra:
        from .corpus.generate import CorpusConfig

        stored = dict(manifest.header_extra["corpus_config"])
        stored = {k: tuple(v) if isinstance(v, list) else v for k, v in stored.items()}
        corpus_cfg = CorpusConfig(**stored)

    train_cfg = configfile.train_config(
        file_cfg, variant=variant, max_steps=steps, batch_size=batch_size,
        learning_rate=learning_rate, alpha_prosody=alpha1, alpha_noise=alpha2,
        adversarial=adversarial, seed=seed, checkpoint_every=checkpoint_every,
        clean_ratio=clean_ratio)
    model_cfg = configfile.model_config(
        file_cfg, corpus_cfg,
        noise_modelling=True if train_cfg.variant == "vipt-nm" else None)

    if clean_manifest is not None:
        clean = Manifest.read(clean_manifest)
        manifest = augment_with_clean(manifest, clean,
                                      train_cfg.clean_ratio or 1.0)

    from .model import ProsodyTransferModel

    torch.manual_seed(train_cfg.seed)
    model = ProsodyTransferModel(model_cfg)
    out = Path(out_dir) if out_dir else _out_root() / "train"
    result = train(model, manifest, train_cfg, out, resume_from=resume_path)
    configfile.write_effective_config(out, {"model": model_cfg, "train": train_cfg},
                                      provenance={
                                          "manifest": str(manifest_path),
                                          "manifest_digest": manifest.corpus_config_digest,
                                          "seed": train_cfg.seed,
                                      })
    click.echo(f"final checkpoint: {result.final_checkpoint}")
    click.echo(f"metric log: {result.metric_log}")


def _load_synthesizer(checkpoint_path, manifest, mode, noise_anchor_id,
                      no_denoise, target_speaker):
    payload = load_checkpoint(checkpoint_path)
    model = build_model(payload).eval()
    speakers = payload["extra"].get("speakers", manifest.speakers())
    languages = payload["extra"].get("languages", manifest.languages())

    noise_anchor = None
    if model.config.noise_modelling:
        if noise_anchor_id is None:
            clean_records = [r for r in manifest.records if r.is_clean]
            candidates = clean_records or manifest.split("train")
            anchor_record = max(candidates,
                                key=lambda r: (r.ground_truth.spec.snr_db
                                               if r.ground_truth else 0.0))
        else:
            anchor_record = manifest.by_id(noise_anchor_id)
        noise_anchor = read_wav(manifest.resolve(anchor_record.audio_path))

    centroids = {}
    if mode == "centroid":
        model_for_centroid = model
        centroids[target_speaker] = compute_speaker_centroid(
            model_for_centroid, manifest, target_speaker)
    return Synthesizer(model, speakers, languages,
                       denoise_references=not no_denoise,
                       noise_anchor=noise_anchor, centroids=centroids), payload


@main.command("synthesize")
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True),
              required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True,
              help="Source corpus manifest providing references and text.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--mode", type=click.Choice(["centroid", "transfer", "nm_transfer"]),
              default="transfer", show_default=True)
@click.option("--target-speaker", default=None)
@click.option("--target-language", default=None)
@click.option("--split", default="test", show_default=True)
@click.option("--limit", type=int, default=None, help="Synthesize at most N utterances.")
@click.option("--noise-anchor", "noise_anchor_id", default=None,
              help="Utterance id whose residual provides the noise code.")
@click.option("--no-denoise", is_flag=True, default=False,
              help="Feed raw (possibly noisy) references to the prosody encoder.")
@click.option("--seed", type=int, default=0, show_default=True)
@fail_cleanly
def cmd_synthesize(checkpoint_path, manifest_path, out_dir, mode, target_speaker,
                   target_language, split, limit, noise_anchor_id, no_denoise, seed):
    """Batch-dub a manifest split toward a target speaker and language."""
    manifest = Manifest.read(manifest_path)
    target_speaker = target_speaker or manifest.speakers()[0]
    target_language = target_language or manifest.languages()[0]
    synth, payload = _load_synthesizer(checkpoint_path, manifest, mode,
                                       noise_anchor_id, no_denoise, target_speaker)
    torch.manual_seed(seed)
    out = Path(out_dir) if out_dir else _out_root() / "synthesize"
    noise_reference = synth.noise_anchor if mode == "nm_transfer" else None
    result = batch_dub(synth, manifest, target_speaker, target_language, mode,
                       out, split=split, noise_reference=noise_reference, limit=limit)
    configfile.write_effective_config(out, {}, provenance={
        "checkpoint": str(checkpoint_path),
        "checkpoint_digest": checkpoint_digest(checkpoint_path),
        "manifest_digest": manifest.corpus_config_digest,
        "mode": mode, "seed": seed,
        "diagnostics_digest": result.diagnostics_digest,
    })
    click.echo(f"synthesized {len(result.output_manifest)} utterances "
               f"({len(result.failures)} failures) to {result.manifest_path}")
    if result.failures and not len(result.output_manifest):
        raise click.ClickException("all synthesis requests failed")


def _frame_config_from_model(payload) -> FrameConfig:
    mc = payload["model_config"]
    return FrameConfig(mc["win_length"] / mc["sample_rate_hz"],
                       mc["hop"] / mc["sample_rate_hz"], mc["n_fft"])


@main.command("evaluate")
@click.option("--outputs", "outputs_path", type=click.Path(exists=True), required=True,
              help="Output manifest produced by `synthesize`.")
@click.option("--references", "references_path", type=click.Path(exists=True),
              required=True, help="Source corpus manifest.")
@click.option("--metric", type=click.Choice(["f0", "snr", "all"]), default="all",
              show_default=True)
@click.option("--n-points", type=int, default=100, show_default=True,
              help="Alignment points for F0 metrics.")
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.option("--system-name", default="outputs", show_default=True)
@fail_cleanly
def cmd_evaluate(outputs_path, references_path, metric, n_points, out_dir, system_name):
    """F0 MSE/correlation against references and an SNR report."""
    outputs = Manifest.read(outputs_path)
    references = Manifest.read(references_path)
    out = Path(out_dir) if out_dir else _out_root() / "evaluate"
    out.mkdir(parents=True, exist_ok=True)

    diag_path = Path(outputs_path).parent / "diagnostics.jsonl"
    source_of = {}
    if diag_path.exists():
        for line in diag_path.read_text().splitlines():
            row = json.loads(line)
            source_of[row["id"]] = row["source_id"]

    if metric in ("f0", "all"):
        hyps, refs = {}, {}
        cfg = FrameConfig()
        stored = references.header_extra.get("corpus_config")
        if stored:
            cfg = FrameConfig(stored["frame_length_s"], stored["frame_shift_s"],
                              stored["n_fft"])
        for record in outputs.records:
            source_id = source_of.get(record.id, record.id.split("--")[0])
            try:
                source = references.by_id(source_id)
            except KeyError:
                continue
            hyp_wav = read_wav(outputs.resolve(record.audio_path))
            ref_path = (source.ground_truth.clean_path if source.ground_truth
                        else source.audio_path)
            ref_wav = read_wav(references.resolve(ref_path))
            hyps[source_id] = estimate_f0(hyp_wav, cfg=cfg)
            refs[source_id] = estimate_f0(ref_wav, cfg=cfg)
        report = compare_systems({system_name: hyps}, refs, n_points=n_points)
        report.write(out / "f0_metrics.jsonl")
        click.echo(report.table())

    if metric in ("snr", "all"):
        report = snr_report(outputs, denoiser_mode="spectral_subtraction")
        report.write(out / "snr_report.jsonl")
        click.echo(report.table())

    configfile.write_effective_config(out, {}, provenance={
        "outputs_digest": outputs.corpus_config_digest,
        "references_digest": references.corpus_config_digest,
        "metric": metric, "n_points": n_points,
    })


@main.command("analyze-embeddings")
@click.option("--checkpoint", "checkpoint_path", type=click.Path(exists=True),
              required=True)
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--projection", type=click.Choice(["tsne", "pca"]), default="tsne",
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-per-language", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@fail_cleanly
def cmd_analyze_embeddings(checkpoint_path, manifest_path, projection, seed,
                           max_per_language, out_dir):
    """Project prosody embeddings to 2-D and score language clustering."""
    payload = load_checkpoint(checkpoint_path)
    model = build_model(payload).eval()
    manifest = Manifest.read(manifest_path)
    out = Path(out_dir) if out_dir else _out_root() / "embeddings"

    embeddings, languages, speakers = collect_prosody_embeddings(
        model, manifest, max_per_language=max_per_language)
    report = project_embeddings(embeddings, languages, method=projection, seed=seed)
    report.write(out / "projection.jsonl")
    report.plot(out / "projection.png")

    score = language_clustering_score(embeddings, languages)
    rng = np.random.default_rng(seed)
    shuffled_scores = []
    for _ in range(10):
        permuted = list(languages)
        rng.shuffle(permuted)
        shuffled_scores.append(language_clustering_score(embeddings, permuted))
    baseline = float(np.mean(shuffled_scores))
    summary = {
        "language_silhouette": round(score, 6),
        "shuffled_baseline": round(baseline, 6),
        "independence_threshold": 0.1,
        "language_independent": bool(score < 0.1),
        "n_embeddings": int(embeddings.shape[0]),
    }
    (out / "clustering.json").write_text(json.dumps(summary, indent=2, sort_keys=True)
                                         + "\n", encoding="utf-8")
    configfile.write_effective_config(out, {}, provenance={
        "checkpoint_digest": checkpoint_digest(checkpoint_path),
        "manifest_digest": manifest.corpus_config_digest,
        "projection": projection, "seed": seed,
    })
    click.echo(json.dumps(summary, sort_keys=True))


if __name__ == "__main__":
    main()
