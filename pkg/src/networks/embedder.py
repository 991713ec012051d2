"""
Per-event feature embedding.
"""

from typing import Dict

import torch
from torch import nn

from ..data.batching import PaddedBatch
from ..models.schemas import PAD_CODE, FeatureSchema


class FeatureEmbedder(nn.Module):
    """
    Maps every event to the concatenation, in schema order, of one lookup
    per categorical feature and one learned affine map per numeric feature,
    with the time delta last.
    """

    def __init__(self, schema: FeatureSchema, embed_dim: int):
        super().__init__()
        if not schema.categorical and not schema.numeric:
            raise ValueError("schema declares no features to embed")
        self.schema = schema
        self.embed_dim = embed_dim
        self.categorical = nn.ModuleDict({
            f.name: nn.Embedding(f.vocab_size, f.embed_dim, padding_idx=PAD_CODE) for f in schema.categorical
        })
        self.numeric = nn.ModuleDict({f.name: nn.Linear(1, embed_dim) for f in schema.numeric})
        self.time_delta = nn.Linear(1, embed_dim)

    @property
    def output_dim(self) -> int:
        cat_width = sum(f.embed_dim for f in self.schema.categorical)
        return cat_width + (len(self.schema.numeric) + 1) * self.embed_dim

    def embed_values(
        self, cat: Dict[str, torch.Tensor], num: Dict[str, torch.Tensor], dt: torch.Tensor
    ) -> torch.Tensor:
        """Embed raw channels of shape B x T into B x T x D."""
        dtype = self.time_delta.weight.dtype
        parts = [self.categorical[f.name](cat[f.name]) for f in self.schema.categorical]
        parts += [self.numeric[f.name](num[f.name].to(dtype).unsqueeze(-1)) for f in self.schema.numeric]
        parts.append(self.time_delta(dt.to(dtype).unsqueeze(-1)))
        return torch.cat(parts, dim=-1)

    def forward(self, batch: PaddedBatch) -> torch.Tensor:
        return self.embed_values(batch.cat, batch.num, batch.dt)
