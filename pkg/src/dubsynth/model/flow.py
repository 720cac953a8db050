"""Invertible affine-coupling flow between posterior and prior latents."""

from __future__ import annotations

import torch
import torch.nn as nn

from .modules import ChannelLayerNorm

LOG_SCALE_LIMIT = 2.0


class AffineCoupling(nn.Module):
    """Transforms the second half of the channels conditioned on the first."""

    def __init__(self, latent_dim: int, hidden: int, conditioning_dim: int):
        super().__init__()
        self.half = latent_dim // 2
        self.pre = nn.Conv1d(self.half, hidden, 5, padding=2)
        self.g_proj = nn.Linear(conditioning_dim, hidden)
        self.mid = nn.Conv1d(hidden, hidden, 5, padding=2)
        self.norm = ChannelLayerNorm(hidden)
        self.proj = nn.Conv1d(hidden, 2 * self.half, 1)
        nn.init.zeros_(self.proj.weight)
        nn.init.zeros_(self.proj.bias)

    def _stats(self, za: torch.Tensor, g: torch.Tensor
               ) -> tuple[torch.Tensor, torch.Tensor]:
        h = torch.relu(self.pre(za) + self.g_proj(g).unsqueeze(-1))
        h = self.norm(torch.relu(self.mid(h)))
        stats = self.proj(h)
        shift, raw_scale = torch.split(stats, self.half, dim=1)
        log_scale = LOG_SCALE_LIMIT * torch.tanh(raw_scale)
        return shift, log_scale

    def forward(self, z: torch.Tensor, g: torch.Tensor, mask: torch.Tensor
                ) -> tuple[torch.Tensor, torch.Tensor]:
        za, zb = z[:, : self.half], z[:, self.half :]
        shift, log_scale = self._stats(za, g)
        zb = (shift + zb * torch.exp(log_scale)) * mask
        log_det = (log_scale * mask).sum(dim=(1, 2))
        return torch.cat([za, zb], dim=1), log_det

    def inverse(self, z: torch.Tensor, g: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        za, zb = z[:, : self.half], z[:, self.half :]
        shift, log_scale = self._stats(za, g)
        zb = (zb - shift) * torch.exp(-log_scale) * mask
        return torch.cat([za, zb], dim=1)


class CouplingFlow(nn.Module):
    """Stack of affine couplings with channel flips in between."""

    def __init__(self, latent_dim: int, hidden: int, conditioning_dim: int, blocks: int):
        super().__init__()
        self.couplings = nn.ModuleList(
            AffineCoupling(latent_dim, hidden, conditioning_dim) for _ in range(blocks))
        self.half = latent_dim // 2

    @staticmethod
    def _flip(z: torch.Tensor) -> torch.Tensor:
        return torch.flip(z, dims=[1])

    def forward(self, z: torch.Tensor, g: torch.Tensor,
                mask: torch.Tensor | None = None) -> tuple[torch.Tensor, torch.Tensor]:
        """z: [B, Z, T] -> (z', total log|det J|) per batch item."""
        if mask is None:
            mask = torch.ones_like(z[:, :1])
        total = z.new_zeros(z.size(0))
        for coupling in self.couplings:
            z, log_det = coupling(z, g, mask)
            total = total + log_det
            z = self._flip(z)
        return z, total

    def inverse(self, z: torch.Tensor, g: torch.Tensor,
                mask: torch.Tensor | None = None) -> torch.Tensor:
        if mask is None:
            mask = torch.ones_like(z[:, :1])
        for coupling in reversed(self.couplings):
            z = self._flip(z)
            z = coupling.inverse(z, g, mask)
        return z
