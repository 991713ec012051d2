"""
Bottleneck GRU encoder: the sequence embedding is the hidden state at each
row's last valid event.
"""

import math
from typing import Optional

import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence

from ..data.batching import PaddedBatch
from ..models.schemas import EncoderConfig, FeatureSchema
from .embedder import FeatureEmbedder


def check_prefix_mask(mask: torch.Tensor) -> torch.Tensor:
    """Return lengths; raise if a row is empty or the mask is not left-aligned."""
    lengths = mask.sum(dim=1)
    if bool((lengths == 0).any()):
        raise ValueError("every row needs at least one valid event")
    positions = torch.arange(mask.shape[1], device=mask.device).unsqueeze(0)
    if not torch.equal(mask, positions < lengths.unsqueeze(1)):
        raise ValueError("mask must be prefix-true (left-aligned events)")
    return lengths


class GRUEncoder(nn.Module):
    """Feature embedder followed by a GRU."""

    def __init__(self, schema: FeatureSchema, config: EncoderConfig, embedder: Optional[FeatureEmbedder] = None):
        super().__init__()
        self.config = config
        self.embedder = embedder or FeatureEmbedder(schema, config.feature_embed_dim)
        self.gru = nn.GRU(
            input_size=self.embedder.output_dim,
            hidden_size=config.hidden_size,
            num_layers=config.num_layers,
            batch_first=True,
        )
        self.reset_parameters()

    @property
    def hidden_size(self) -> int:
        return self.config.hidden_size

    def reset_parameters(self):
        """Orthogonal recurrent kernels (per gate), fan-in uniform input kernels, zero biases."""
        hidden = self.config.hidden_size
        for name, param in self.gru.named_parameters():
            if name.startswith("weight_hh"):
                for gate in range(3):
                    nn.init.orthogonal_(param.data[gate * hidden:(gate + 1) * hidden])
            elif name.startswith("weight_ih"):
                bound = 1.0 / math.sqrt(param.shape[1])
                nn.init.uniform_(param, -bound, bound)
            else:
                nn.init.zeros_(param)

    def encode(self, x: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """
        Run the GRU over valid positions only.

        Args:
            x: Event vectors B x T x D
            mask: Prefix-true validity mask B x T

        Returns:
            Hidden state at each row's last valid position, B x H
        """
        lengths = check_prefix_mask(mask)
        packed = pack_padded_sequence(x, lengths.cpu(), batch_first=True, enforce_sorted=False)
        _, h_n = self.gru(packed)
        return h_n[-1]

    def forward(self, batch: PaddedBatch) -> torch.Tensor:
        return self.encode(self.embedder(batch), batch.mask)
