"""Waveform decoder: upsampling generator with anti-aliased snake activations."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

AA_TAPS = 12
AA_CUTOFF = 0.25
AA_KAISER_BETA = 6.0


def _lowpass_kernel() -> torch.Tensor:
    n = np.arange(AA_TAPS) - (AA_TAPS - 1) / 2.0
    kernel = 2 * AA_CUTOFF * np.sinc(2 * AA_CUTOFF * n) * np.kaiser(AA_TAPS, AA_KAISER_BETA)
    kernel /= kernel.sum()
    return torch.tensor(kernel, dtype=torch.float32)


class AntiAliasedSnake(nn.Module):
    """snake(x) = x + sin^2(a x)/a evaluated at 2x rate between half-band
    filters, suppressing the harmonics the nonlinearity would alias."""

    def __init__(self, channels: int):
        super().__init__()
        self.log_alpha = nn.Parameter(torch.zeros(channels))
        kernel = _lowpass_kernel()
        self.register_buffer("kernel", kernel.view(1, 1, -1))

    def _filters(self, channels: int, dtype) -> torch.Tensor:
        return self.kernel.to(dtype).expand(channels, 1, AA_TAPS)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        c = x.size(1)
        k = self._filters(c, x.dtype)
        up = F.conv_transpose1d(x, 2.0 * k, stride=2, padding=(AA_TAPS - 2) // 2, groups=c)
        alpha = torch.exp(self.log_alpha).view(1, -1, 1)
        act = up + torch.sin(alpha * up) ** 2 / alpha
        return F.conv1d(act, k, stride=2, padding=(AA_TAPS - 2) // 2, groups=c)


class ResidualBlock(nn.Module):
    def __init__(self, channels: int, kernel_size: int = 3, dilations=(1, 3)):
        super().__init__()
        self.convs = nn.ModuleList()
        self.activations = nn.ModuleList()
        for d in dilations:
            pad = (kernel_size - 1) // 2 * d
            self.convs.append(nn.Conv1d(channels, channels, kernel_size,
                                        padding=pad, dilation=d))
            self.activations.append(AntiAliasedSnake(channels))

    def forward(self, x):
        for act, conv in zip(self.activations, self.convs):
            x = x + conv(act(x))
        return x


class Decoder(nn.Module):
    """Latent frames -> waveform at hop-length upsampling."""

    def __init__(self, latent_dim: int, channels: int, upsample_rates: tuple[int, ...],
                 conditioning_dim: int):
        super().__init__()
        self.pre = nn.Conv1d(latent_dim, channels, 7, padding=3)
        self.g_proj = nn.Linear(conditioning_dim, channels)
        self.ups = nn.ModuleList()
        self.blocks = nn.ModuleList()
        self.up_activations = nn.ModuleList()
        ch = channels
        for rate in upsample_rates:
            k = 2 * rate if rate % 2 == 0 else 3 * rate
            self.up_activations.append(AntiAliasedSnake(ch))
            self.ups.append(nn.ConvTranspose1d(ch, ch // 2, k, stride=rate,
                                               padding=(k - rate) // 2))
            ch //= 2
            self.blocks.append(ResidualBlock(ch))
        self.post_activation = AntiAliasedSnake(ch)
        # Small-gain output projection: near-silent start without killing the
        # reconstruction gradient (an exactly-zero output has none).
        self.post = nn.Conv1d(ch, 1, 7, padding=3)
        with torch.no_grad():
            self.post.weight.mul_(0.01)
            nn.init.zeros_(self.post.bias)
        self.hop = int(np.prod(upsample_rates))

    def forward(self, z: torch.Tensor, g: torch.Tensor) -> torch.Tensor:
        """z: [B, Z, T]; returns [B, 1, T * hop] in (-1, 1)."""
        x = self.pre(z) + self.g_proj(g).unsqueeze(-1)
        for act, up, block in zip(self.up_activations, self.ups, self.blocks):
            x = block(up(act(x)))
        return torch.tanh(self.post(self.post_activation(x)))
