"""Frame prior network: refines duration-upsampled text states into
per-frame prior Gaussians over the latent."""

from __future__ import annotations

import torch
import torch.nn as nn

from .modules import ConvReluNorm


class FramePriorNetwork(nn.Module):
    def __init__(self, text_hidden: int, prior_hidden: int, latent_dim: int):
        super().__init__()
        self.stack = ConvReluNorm(text_hidden, prior_hidden, n_layers=3, kernel_size=5)
        self.proj = nn.Conv1d(prior_hidden, 2 * latent_dim, 1)
        self.latent_dim = latent_dim

    def forward(self, upsampled: torch.Tensor, frame_mask: torch.Tensor
                ) -> tuple[torch.Tensor, torch.Tensor]:
        """upsampled: [B, T, H]; frame_mask: [B, T] bool.
        Returns prior (mean, log_std), each [B, Z, T]."""
        m = frame_mask.unsqueeze(1).to(upsampled.dtype)
        x = self.stack(upsampled.transpose(1, 2), m)
        stats = self.proj(x) * m
        mean, log_std = torch.split(stats, self.latent_dim, dim=1)
        return mean, log_std
