"""Training loop: deterministic batching, Eq.-1 logging, checkpoint cadence."""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..corpus.augment import sampling_weights
from ..corpus.manifest import Manifest
from ..model import ProsodyTransferModel
from ..signal.audio import Waveform
from ..signal.pitch import estimate_f0
from ..signal.spectrogram import FrameConfig
from .checkpoint import check_config_compatible, load_checkpoint, save_checkpoint
from .data import FeatureExtractor
from .discriminator import DiscriminatorSet
from .losses import (
    LossBreakdown,
    MultiResolutionSTFTLoss,
    adversarial_discriminator_loss,
    adversarial_generator_loss,
    batch_kld,
    combine,
    feature_matching_loss,
)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 8  # paper-scale setting is 30 per device
    max_steps: int = 20000  # paper-scale setting is 700k
    learning_rate: float = 2e-4
    lr_decay: float = 0.999  # exponential, applied per epoch
    alpha_prosody: float = 0.001
    alpha_noise: float = 0.001
    kld_warmup_steps: int = 0  # 0 disables annealing
    adversarial: bool = False
    seed: int = 0
    checkpoint_every: int = 1000
    eval_every: int = 500
    segment_frames: int = 24
    recon_weight: float = 45.0
    stft_resolutions: tuple[tuple[int, int], ...] = ((512, 128), (1024, 256), (256, 64))
    clean_ratio: float = 0.0
    variant: str = "vipt"
    denoise_mode: str = "oracle"
    grad_clip_norm: float | None = None

    def __post_init__(self):
        if self.batch_size <= 0 or self.max_steps < 0 or self.learning_rate <= 0:
            raise ValueError("batch_size/max_steps/learning_rate must be positive")
        if self.alpha_prosody < 0 or self.alpha_noise < 0:
            raise ValueError("KLD coefficients must be >= 0")
        if self.variant not in ("vipt", "vipt-nm"):
            raise ValueError(f"unknown variant: {self.variant}")


@dataclass
class TrainResult:
    final_checkpoint: Path
    checkpoints: list[Path]
    metric_log: Path
    final_step: int
    extractor: FeatureExtractor = field(repr=False, default=None)


def _step_seed(seed: int, step: int) -> int:
    return (seed * 1_000_003 + step * 7_919 + 17) % (2**62)


def _draw_batch(n_records: int, probabilities: np.ndarray, seed: int, step: int,
                batch_size: int) -> np.ndarray:
    rng = np.random.default_rng([seed, step])
    return rng.choice(n_records, size=batch_size, p=probabilities)


def train(model: ProsodyTransferModel, manifest: Manifest, cfg: TrainConfig,
          out_dir: str | Path, resume_from: str | Path | None = None) -> TrainResult:
    """Run (or resume) training; writes checkpoints and a JSONL metric log."""
    if cfg.variant == "vipt-nm" and not model.config.noise_modelling:
        raise ValueError("vipt-nm training requires a noise-modelling model")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metric_log = out_dir / "metrics.jsonl"

    extractor = FeatureExtractor(manifest, model.config, cfg.variant, cfg.denoise_mode)
    records, probabilities = sampling_weights(manifest, cfg.clean_ratio, "train")
    if not records:
        raise ValueError("manifest has no train-split records")
    dev_records = manifest.split("dev")[:3]

    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate,
                                 betas=(0.8, 0.99))
    scheduler = torch.optim.lr_scheduler.ExponentialLR(optimizer, cfg.lr_decay)
    stft_loss = MultiResolutionSTFTLoss(cfg.stft_resolutions)

    discriminator = d_optimizer = None
    if cfg.adversarial:
        discriminator = DiscriminatorSet()
        d_optimizer = torch.optim.Adam(discriminator.parameters(),
                                       lr=cfg.learning_rate, betas=(0.8, 0.99))

    start_step = 0
    if resume_from is not None:
        payload = load_checkpoint(resume_from)
        check_config_compatible(model.config, payload)
        model.load_state_dict(payload["model_state"])
        if payload["optimizer_state"] is not None:
            optimizer.load_state_dict(payload["optimizer_state"])
        if payload["scheduler_state"] is not None:
            scheduler.load_state_dict(payload["scheduler_state"])
        start_step = payload["step"]

    steps_per_epoch = max(1, math.ceil(len(records) / cfg.batch_size))
    extra = {"speakers": extractor.speakers, "languages": extractor.languages,
             "variant": cfg.variant, "train_config": asdict(cfg)}
    checkpoints: list[Path] = []

    def save(step: int) -> Path:
        path = save_checkpoint(out_dir / f"checkpoint_{step:06d}.pt", model,
                               optimizer, scheduler, step, extra)
        checkpoints.append(path)
        return path

    if cfg.max_steps == start_step:
        final = save(start_step)
        return TrainResult(final, checkpoints, metric_log, start_step, extractor)

    model.train()
    t0 = time.monotonic()
    with metric_log.open("a", encoding="utf-8") as log:
        for step in range(start_step, cfg.max_steps):
            idx = _draw_batch(len(records), probabilities, cfg.seed, step, cfg.batch_size)
            batch_records = [records[i] for i in idx]
            torch.manual_seed(_step_seed(cfg.seed, step))
            batch = extractor.collate(batch_records)

            out = model.forward_train(batch, cfg.segment_frames)
            y_hat, y_ref = out["waveform_segments"], out["target_segments"]

            adv_loss = torch.zeros(())
            fm_loss = torch.zeros(())
            if cfg.adversarial:
                d_real, _ = discriminator(y_ref)
                d_fake, _ = discriminator(y_hat.detach())
                d_loss = adversarial_discriminator_loss(d_real, d_fake)
                d_optimizer.zero_grad()
                d_loss.backward()
                d_optimizer.step()
                d_fake_out, fake_feats = discriminator(y_hat)
                _, real_feats = discriminator(y_ref)
                adv_loss = adversarial_generator_loss(d_fake_out)
                fm_loss = feature_matching_loss(real_feats, fake_feats)

            recon = cfg.recon_weight * stft_loss(y_hat, y_ref)
            kl = out["kl"]
            duration = out["duration_loss"]
            prosody_kld = batch_kld(out["prosody"].mean, out["prosody"].log_variance)
            if out["noise"] is not None:
                noise_kld = batch_kld(out["noise"].mean, out["noise"].log_variance)
            else:
                noise_kld = torch.zeros(())

            warm = 1.0
            if cfg.kld_warmup_steps > 0:
                warm = min(1.0, (step + 1) / cfg.kld_warmup_steps)
            a1 = cfg.alpha_prosody * warm
            a2 = cfg.alpha_noise * warm

            loss = (recon + kl + duration + adv_loss + fm_loss
                    + a1 * prosody_kld + a2 * noise_kld)
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite loss at step {step}; offending batch ids: "
                    f"{batch['record_ids']}"
                )
            optimizer.zero_grad()
            loss.backward()
            if cfg.grad_clip_norm is not None:
                torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip_norm)
            optimizer.step()

            breakdown = combine(LossBreakdown(
                l_vits_recon=float(recon.detach()),
                l_vits_kl=float(kl.detach()),
                l_vits_duration=float(duration.detach()),
                l_vits_adv=float(adv_loss.detach()),
                l_vits_featmatch=float(fm_loss.detach()),
                l_prosody_kld=float(prosody_kld.detach()),
                l_noise_kld=float(noise_kld.detach()),
                alpha1=a1,
                alpha2=a2,
            ))
            log.write(json.dumps({"kind": "train", "step": step,
                                  **breakdown.to_dict(),
                                  "wall_clock_s": round(time.monotonic() - t0, 3)})
                      + "\n")

            if (step + 1) % steps_per_epoch == 0:
                scheduler.step()
            if cfg.eval_every and (step + 1) % cfg.eval_every == 0 and dev_records:
                metrics = _dev_eval(model, extractor, dev_records, stft_loss,
                                    cfg.recon_weight)
                log.write(json.dumps({"kind": "dev", "step": step + 1, **metrics}) + "\n")
                model.train()
            if cfg.checkpoint_every and (step + 1) % cfg.checkpoint_every == 0 \
                    and (step + 1) != cfg.max_steps:
                save(step + 1)

    final = save(cfg.max_steps)
    return TrainResult(final, checkpoints, metric_log, cfg.max_steps, extractor)


def _dev_eval(model: ProsodyTransferModel, extractor: FeatureExtractor,
              dev_records, stft_loss: MultiResolutionSTFTLoss,
              recon_weight: float) -> dict:
    """Teacher-forced resynthesis metrics on a fixed dev subset."""
    model.eval()
    cfg = model.config
    frame_cfg = FrameConfig(cfg.win_length / cfg.sample_rate_hz,
                            cfg.hop / cfg.sample_rate_hz, cfg.n_fft)
    correlations = []
    recon_values = []
    with torch.no_grad():
        for record in dev_records:
            batch = extractor.collate([record])
            g = model.global_conditioning(batch["speaker_ids"], batch["language_ids"])
            _, _, z = model.posterior_encode(batch["linear_spec"], batch["spec_lengths"],
                                             g, deterministic=True)
            y_hat = model.decode(z, g).squeeze(0).squeeze(0)
            y_ref = batch["waveform"][0, : y_hat.numel()]
            n = min(y_hat.numel(), y_ref.numel())
            recon_values.append(float(recon_weight * stft_loss(
                y_hat[:n].unsqueeze(0), y_ref[:n].unsqueeze(0))))
            rho = _f0_correlation(y_hat[:n].numpy(), y_ref[:n].numpy(),
                                  cfg.sample_rate_hz, frame_cfg)
            if rho is not None:
                correlations.append(rho)
    out = {"dev_recon": float(np.mean(recon_values))}
    if correlations:
        out["dev_f0_corr"] = float(np.mean(correlations))
    return out


def _f0_correlation(predicted: np.ndarray, reference: np.ndarray,
                    sample_rate_hz: int, frame_cfg: FrameConfig) -> float | None:
    """Pearson correlation of voiced-region contours resampled to 100 points."""
    try:
        c_pred = estimate_f0(Waveform(np.clip(predicted, -1, 1), sample_rate_hz),
                             cfg=frame_cfg)
        c_ref = estimate_f0(Waveform(np.clip(reference, -1, 1), sample_rate_hz),
                            cfg=frame_cfg)
    except ValueError:
        return None
    if c_pred.num_voiced < 5 or c_ref.num_voiced < 5:
        return None
    grid = np.linspace(0.0, 1.0, 100)
    a = np.interp(grid, np.linspace(0, 1, c_pred.num_voiced), c_pred.voiced_values())
    b = np.interp(grid, np.linspace(0, 1, c_ref.num_voiced), c_ref.voiced_values())
    if np.std(a) < 1e-9 or np.std(b) < 1e-9:
        return None
    return float(np.corrcoef(a, b)[0, 1])
