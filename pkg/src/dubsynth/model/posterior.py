"""Posterior encoder: per-frame latents from the linear spectrogram."""

from __future__ import annotations

import torch
import torch.nn as nn

from .modules import ChannelLayerNorm, sequence_mask


class PosteriorEncoder(nn.Module):
    def __init__(self, input_bins: int, hidden: int, latent_dim: int,
                 conditioning_dim: int, n_layers: int = 3):
        super().__init__()
        self.pre = nn.Conv1d(input_bins, hidden, 5, padding=2)
        self.g_proj = nn.Linear(conditioning_dim, hidden)
        self.convs = nn.ModuleList()
        self.norms = nn.ModuleList()
        for i in range(n_layers):
            dilation = 2**i
            self.convs.append(nn.Conv1d(hidden, hidden, 5,
                                        padding=2 * dilation, dilation=dilation))
            self.norms.append(ChannelLayerNorm(hidden))
        self.proj = nn.Conv1d(hidden, 2 * latent_dim, 1)
        self.latent_dim = latent_dim

    def forward(self, spec: torch.Tensor, lengths: torch.Tensor, g: torch.Tensor,
                deterministic: bool = False
                ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """spec: [B, bins, T]; g: [B, Dg]. Returns (mean, log_std, z), all [B, Z, T]."""
        mask = sequence_mask(lengths, spec.size(2)).unsqueeze(1).to(spec.dtype)
        x = self.pre(spec * mask) + self.g_proj(g).unsqueeze(-1)
        for conv, norm in zip(self.convs, self.norms):
            x = x + norm(torch.relu(conv(x * mask)))
        stats = self.proj(x * mask) * mask
        mean, log_std = torch.split(stats, self.latent_dim, dim=1)
        if deterministic:
            z = mean
        else:
            z = mean + torch.randn_like(mean) * torch.exp(log_std)
        return mean, log_std, z * mask
