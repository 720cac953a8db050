"""Shared building blocks for the network modules."""

from __future__ import annotations

import math

import torch
import torch.nn as nn
import torch.nn.functional as F


def sequence_mask(lengths: torch.Tensor, max_length: int | None = None) -> torch.Tensor:
    """[B, T] boolean mask, True on valid positions."""
    if max_length is None:
        max_length = int(lengths.max())
    steps = torch.arange(max_length, device=lengths.device)
    return steps.unsqueeze(0) < lengths.unsqueeze(1)


class ChannelLayerNorm(nn.Module):
    """LayerNorm over the channel axis of [B, C, T] tensors."""

    def __init__(self, channels: int):
        super().__init__()
        self.norm = nn.LayerNorm(channels)

    def forward(self, x):
        return self.norm(x.transpose(1, 2)).transpose(1, 2)


class ConvReluNorm(nn.Module):
    """Conv1d -> ReLU -> LayerNorm stack that preserves sequence length."""

    def __init__(self, in_channels: int, hidden_channels: int, n_layers: int,
                 kernel_size: int = 3, dilations: tuple[int, ...] | None = None):
        super().__init__()
        dilations = dilations or (1,) * n_layers
        self.convs = nn.ModuleList()
        self.norms = nn.ModuleList()
        ch = in_channels
        for i in range(n_layers):
            d = dilations[i % len(dilations)]
            pad = (kernel_size - 1) // 2 * d
            self.convs.append(nn.Conv1d(ch, hidden_channels, kernel_size,
                                        padding=pad, dilation=d))
            self.norms.append(ChannelLayerNorm(hidden_channels))
            ch = hidden_channels

    def forward(self, x, mask=None):
        for conv, norm in zip(self.convs, self.norms):
            x = norm(F.relu(conv(x)))
            if mask is not None:
                x = x * mask
        return x


class SinusoidalPositions(nn.Module):
    def __init__(self, dim: int, max_length: int = 4096):
        super().__init__()
        position = torch.arange(max_length).unsqueeze(1)
        div = torch.exp(torch.arange(0, dim, 2) * (-math.log(10000.0) / dim))
        table = torch.zeros(max_length, dim)
        table[:, 0::2] = torch.sin(position * div)
        table[:, 1::2] = torch.cos(position * div[: (dim + 1) // 2])
        self.register_buffer("table", table, persistent=False)

    def forward(self, x):  # x: [B, L, H]
        return x + self.table[: x.size(1)].unsqueeze(0)


def zero_init(module: nn.Module) -> nn.Module:
    """Zero weights and biases so the module starts as the constant-0 map."""
    for p in module.parameters():
        nn.init.zeros_(p)
    return module


def length_regulate(hidden: torch.Tensor, durations: torch.Tensor
                    ) -> tuple[torch.Tensor, torch.Tensor]:
    """Repeat each phoneme's hidden vector by its duration in frames.

    hidden: [B, L, H]; durations: [B, L] integer frames (0 on padding).
    Returns upsampled [B, T_max, H] and frame lengths [B]."""
    batch = hidden.size(0)
    frame_lengths = durations.sum(dim=1)
    t_max = int(frame_lengths.max())
    out = hidden.new_zeros(batch, t_max, hidden.size(2))
    for b in range(batch):
        d = durations[b]
        expanded = torch.repeat_interleave(hidden[b], d, dim=0)
        out[b, : expanded.size(0)] = expanded
    return out, frame_lengths
