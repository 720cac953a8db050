"""Phoneme encoder with utterance-level prosody/noise conditioning."""

from __future__ import annotations

import torch
import torch.nn as nn

from .modules import SinusoidalPositions, sequence_mask


class TextEncoder(nn.Module):
    """Embeds phonemes, injects the conditioning vector at the input (before
    the attention blocks), and runs a small transformer encoder."""

    def __init__(self, num_phonemes: int, hidden: int, layers: int, heads: int,
                 conditioning_input_dim: int, mode: str = "add"):
        super().__init__()
        self.mode = mode
        self.embedding = nn.Embedding(num_phonemes, hidden)
        self.positions = SinusoidalPositions(hidden)
        # Bias-free: a zero conditioning vector is exactly a no-op, and a
        # zeroed projection makes the output independent of the embeddings.
        if mode == "add":
            self.conditioning_proj = nn.Linear(conditioning_input_dim, hidden,
                                               bias=False)
        else:  # concat_project
            self.conditioning_proj = nn.Linear(hidden + conditioning_input_dim,
                                               hidden, bias=False)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden, nhead=heads, dim_feedforward=2 * hidden,
            batch_first=True, dropout=0.1)
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers,
                                             enable_nested_tensor=False)

    def forward(self, phoneme_ids: torch.Tensor, lengths: torch.Tensor,
                conditioning: torch.Tensor | None = None) -> torch.Tensor:
        """phoneme_ids: [B, L]; conditioning: [B, Dc] or None. Returns [B, L, H]."""
        if int(phoneme_ids.max()) >= self.embedding.num_embeddings:
            raise ValueError(
                f"phoneme id {int(phoneme_ids.max())} out of vocabulary "
                f"({self.embedding.num_embeddings} symbols)"
            )
        x = self.embedding(phoneme_ids)
        if conditioning is not None:
            if self.mode == "add":
                x = x + self.conditioning_proj(conditioning).unsqueeze(1)
            else:
                broadcast = conditioning.unsqueeze(1).expand(-1, x.size(1), -1)
                x = x + self.conditioning_proj(torch.cat([x, broadcast], dim=-1))
        x = self.positions(x)
        padding_mask = ~sequence_mask(lengths, phoneme_ids.size(1))
        out = self.encoder(x, src_key_padding_mask=padding_mask)
        return out * (~padding_mask).unsqueeze(-1)
