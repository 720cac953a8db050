"""Waveform discriminators: multi-period plus a short-time-transform critic.

Implemented for the adversarial flag; training defaults keep them off."""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F


class PeriodDiscriminator(nn.Module):
    def __init__(self, period: int, channels=(32, 64, 128, 128)):
        super().__init__()
        self.period = period
        self.convs = nn.ModuleList()
        ch_in = 1
        for ch_out in channels:
            self.convs.append(nn.Conv2d(ch_in, ch_out, (5, 1), (3, 1), padding=(2, 0)))
            ch_in = ch_out
        self.post = nn.Conv2d(ch_in, 1, (3, 1), padding=(1, 0))

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        b, c, t = x.shape
        if t % self.period:
            x = F.pad(x, (0, self.period - t % self.period), "reflect")
            t = x.size(2)
        x = x.view(b, c, t // self.period, self.period)
        feats = []
        for conv in self.convs:
            x = F.leaky_relu(conv(x), 0.1)
            feats.append(x)
        out = self.post(x)
        feats.append(out)
        return out.flatten(1), feats


class STFTDiscriminator(nn.Module):
    def __init__(self, n_fft: int = 512, hop: int = 128, channels=(32, 64, 128)):
        super().__init__()
        self.n_fft = n_fft
        self.hop = hop
        self.register_buffer("window", torch.hann_window(n_fft), persistent=False)
        self.convs = nn.ModuleList()
        ch_in = 1
        for ch_out in channels:
            self.convs.append(nn.Conv2d(ch_in, ch_out, (3, 3), (2, 2), padding=1))
            ch_in = ch_out
        self.post = nn.Conv2d(ch_in, 1, 3, padding=1)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, list[torch.Tensor]]:
        spec = torch.stft(x.squeeze(1), self.n_fft, self.hop, window=self.window,
                          center=True, return_complex=True)
        mag = torch.abs(spec).unsqueeze(1).clamp(min=1e-7)
        h = torch.log(mag)
        feats = []
        for conv in self.convs:
            h = F.leaky_relu(conv(h), 0.1)
            feats.append(h)
        out = self.post(h)
        feats.append(out)
        return out.flatten(1), feats


class DiscriminatorSet(nn.Module):
    """Periods 2/3/5/7 plus one STFT discriminator."""

    def __init__(self, periods=(2, 3, 5, 7), stft_n_fft: int = 512, stft_hop: int = 128):
        super().__init__()
        self.discriminators = nn.ModuleList(
            [PeriodDiscriminator(p) for p in periods]
            + [STFTDiscriminator(stft_n_fft, stft_hop)])

    def forward(self, x: torch.Tensor):
        outputs, features = [], []
        for d in self.discriminators:
            out, feats = d(x)
            outputs.append(out)
            features.append(feats)
        return outputs, features
