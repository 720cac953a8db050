"""Explicit duration predictor (replaces alignment search)."""

from __future__ import annotations

import torch
import torch.nn as nn

from .modules import ConvReluNorm


class DurationPredictor(nn.Module):
    """Predicts log(1 + frames) per phoneme from text-encoder hiddens."""

    def __init__(self, hidden: int, conditioning_dim: int, kernel_size: int = 3):
        super().__init__()
        self.conditioning_proj = nn.Linear(conditioning_dim, hidden)
        self.stack = ConvReluNorm(hidden, hidden, n_layers=2, kernel_size=kernel_size)
        self.proj = nn.Conv1d(hidden, 1, 1)

    def forward(self, hidden: torch.Tensor, mask: torch.Tensor,
                g: torch.Tensor) -> torch.Tensor:
        """hidden: [B, L, H] (detach upstream); mask: [B, L] bool; g: [B, Dg].
        Returns predicted log(1 + frames), [B, L]."""
        x = hidden.transpose(1, 2) + self.conditioning_proj(g).unsqueeze(-1)
        x = self.stack(x, mask.unsqueeze(1).to(x.dtype))
        return self.proj(x).squeeze(1) * mask.to(x.dtype)

    @staticmethod
    def to_frames(log_durations: torch.Tensor, mask: torch.Tensor,
                  length_scale: float = 1.0) -> torch.Tensor:
        """Round predictions to integer frame counts, floored at one frame."""
        frames = torch.round(torch.expm1(log_durations) * length_scale)
        frames = torch.clamp(frames, min=1.0)
        return (frames * mask).long()

    @staticmethod
    def loss(predicted_log: torch.Tensor, target_frames: torch.Tensor,
             mask: torch.Tensor) -> torch.Tensor:
        """Masked MSE in the log(1 + frames) domain."""
        target = torch.log1p(target_frames.to(predicted_log.dtype))
        sq = (predicted_log - target) ** 2 * mask
        return sq.sum() / mask.sum().clamp(min=1)
