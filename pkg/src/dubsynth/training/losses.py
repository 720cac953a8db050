"""Loss terms and their weighted combination.

The total objective is the backbone loss plus the two reference-encoder KLD
terms scaled by their coefficients (both default 0.001)."""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
import torch.nn.functional as F

DEFAULT_ALPHA_PROSODY = 0.001
DEFAULT_ALPHA_NOISE = 0.001
DEFAULT_STFT_RESOLUTIONS = ((512, 128), (1024, 256), (256, 64))


def kld_standard_normal(mean: torch.Tensor, log_variance: torch.Tensor) -> torch.Tensor:
    """KL(N(mean, diag exp(log_variance)) || N(0, I)) summed over dimensions.

    0.5 * sum(mean^2 + exp(log_variance) - 1 - log_variance); >= 0."""
    if mean.shape != log_variance.shape:
        raise ValueError("mean and log_variance must have the same shape")
    if not (torch.isfinite(mean).all() and torch.isfinite(log_variance).all()):
        raise ValueError("kld_standard_normal requires finite inputs")
    kl = 0.5 * (mean**2 + torch.exp(log_variance) - 1.0 - log_variance)
    return kl.sum(dim=-1)


def batch_kld(mean: torch.Tensor, log_variance: torch.Tensor) -> torch.Tensor:
    """Mean over the batch of per-item summed KLD."""
    return kld_standard_normal(mean, log_variance).mean()


@dataclass
class LossBreakdown:
    """Every term of the training objective, with its coefficients."""

    l_vits_recon: float
    l_vits_kl: float
    l_vits_duration: float
    l_vits_adv: float
    l_vits_featmatch: float
    l_prosody_kld: float
    l_noise_kld: float
    alpha1: float
    alpha2: float
    l_total: float = field(default=0.0)

    @property
    def l_vits_sum(self) -> float:
        return (self.l_vits_recon + self.l_vits_kl + self.l_vits_duration
                + self.l_vits_adv + self.l_vits_featmatch)

    def to_dict(self) -> dict:
        return {
            "l_vits_recon": self.l_vits_recon,
            "l_vits_kl": self.l_vits_kl,
            "l_vits_duration": self.l_vits_duration,
            "l_vits_adv": self.l_vits_adv,
            "l_vits_featmatch": self.l_vits_featmatch,
            "l_prosody_kld": self.l_prosody_kld,
            "l_noise_kld": self.l_noise_kld,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "l_total": self.l_total,
        }


def total_loss(parts: LossBreakdown, alpha1: float | None = None,
               alpha2: float | None = None) -> float:
    """Exact weighted sum; the base variant contributes no noise term."""
    a1 = parts.alpha1 if alpha1 is None else alpha1
    a2 = parts.alpha2 if alpha2 is None else alpha2
    return parts.l_vits_sum + a1 * parts.l_prosody_kld + a2 * parts.l_noise_kld


def combine(parts: LossBreakdown) -> LossBreakdown:
    parts.l_total = total_loss(parts)
    return parts


class MultiResolutionSTFTLoss(torch.nn.Module):
    """Spectral convergence + log-magnitude L1 over several resolutions."""

    def __init__(self, resolutions=DEFAULT_STFT_RESOLUTIONS):
        super().__init__()
        self.resolutions = tuple(resolutions)
        for n_fft, _ in self.resolutions:
            self.register_buffer(f"window_{n_fft}", torch.hann_window(n_fft),
                                 persistent=False)

    def _magnitudes(self, x: torch.Tensor, n_fft: int, hop: int) -> torch.Tensor:
        window = getattr(self, f"window_{n_fft}")
        spec = torch.stft(x, n_fft=n_fft, hop_length=hop, win_length=n_fft,
                          window=window.to(x.dtype), center=True, return_complex=True)
        return torch.abs(spec).clamp(min=1e-7)

    def forward(self, predicted: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        """predicted/target: [B, 1, N] or [B, N]."""
        if predicted.dim() == 3:
            predicted = predicted.squeeze(1)
        if target.dim() == 3:
            target = target.squeeze(1)
        loss = predicted.new_zeros(())
        for n_fft, hop in self.resolutions:
            if predicted.size(-1) < n_fft:
                continue
            mag_p = self._magnitudes(predicted, n_fft, hop)
            mag_t = self._magnitudes(target, n_fft, hop)
            sc = torch.norm(mag_t - mag_p, p="fro") / torch.norm(mag_t, p="fro").clamp(min=1e-7)
            log_l1 = F.l1_loss(torch.log(mag_p), torch.log(mag_t))
            loss = loss + sc + log_l1
        return loss / len(self.resolutions)


def adversarial_generator_loss(disc_fake_outputs: list[torch.Tensor]) -> torch.Tensor:
    loss = disc_fake_outputs[0].new_zeros(())
    for d in disc_fake_outputs:
        loss = loss + torch.mean((1.0 - d) ** 2)
    return loss


def adversarial_discriminator_loss(disc_real_outputs: list[torch.Tensor],
                                   disc_fake_outputs: list[torch.Tensor]) -> torch.Tensor:
    loss = disc_real_outputs[0].new_zeros(())
    for dr, df in zip(disc_real_outputs, disc_fake_outputs):
        loss = loss + torch.mean((1.0 - dr) ** 2) + torch.mean(df**2)
    return loss


def feature_matching_loss(feats_real: list[list[torch.Tensor]],
                          feats_fake: list[list[torch.Tensor]]) -> torch.Tensor:
    loss = feats_real[0][0].new_zeros(())
    for fr_list, ff_list in zip(feats_real, feats_fake):
        for fr, ff in zip(fr_list, ff_list):
            loss = loss + F.l1_loss(ff, fr.detach())
    return loss
