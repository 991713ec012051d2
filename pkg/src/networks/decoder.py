"""
Autoregressive transformer decoder conditioned on the sequence embedding
through cross-attention over a single memory slot.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

import torch
from torch import nn

from ..data.batching import PaddedBatch
from ..models.schemas import PAD_CODE, DecoderConfig, EventSequence, FeatureSchema
from .embedder import FeatureEmbedder


@dataclass
class DecoderOutput:
    """Per-step predictions of the next event; step j predicts event j."""

    cat_logits: Dict[str, torch.Tensor]   # B x T x vocab
    num: Dict[str, torch.Tensor]          # B x T
    dt: torch.Tensor                      # B x T


def sinusoidal_positions(length: int, dim: int, dtype: torch.dtype, device=None) -> torch.Tensor:
    position = torch.arange(length, dtype=dtype, device=device).unsqueeze(1)
    freq = torch.exp(torch.arange(0, dim, 2, dtype=dtype, device=device) * (-math.log(10000.0) / dim))
    table = torch.zeros(length, dim, dtype=dtype, device=device)
    table[:, 0::2] = torch.sin(position * freq)
    table[:, 1::2] = torch.cos(position * freq)[:, : dim // 2]
    return table


def causal_mask(length: int, dtype: torch.dtype, device=None) -> torch.Tensor:
    """Additive mask: position j attends to positions <= j."""
    upper = torch.triu(torch.ones(length, length, dtype=torch.bool, device=device), diagonal=1)
    return torch.zeros(length, length, dtype=dtype, device=device).masked_fill(upper, float("-inf"))


class EventDecoder(nn.Module):
    """
    Teacher-forced next-event decoder.

    Inputs are the shared event embedding projected to ``model_dim`` and
    shifted right behind a learned start token; the layer-normalised sequence
    embedding is the only cross-attention memory.
    """

    def __init__(self, schema: FeatureSchema, embedder: FeatureEmbedder, hidden_size: int, config: DecoderConfig):
        super().__init__()
        self.schema = schema
        self.config = config
        self.embedder = embedder
        d = config.model_dim
        self.input_proj = nn.Linear(embedder.output_dim, d)
        self.start_token = nn.Parameter(torch.randn(d) * 0.02)
        self.memory_norm = nn.LayerNorm(hidden_size)
        self.memory_proj = nn.Linear(hidden_size, d)
        layer = nn.TransformerDecoderLayer(
            d_model=d,
            nhead=config.heads,
            dim_feedforward=config.ff_dim,
            dropout=config.dropout,
            batch_first=True,
        )
        self.decoder = nn.TransformerDecoder(
            layer, num_layers=config.layers, norm=nn.LayerNorm(d) if config.layer_norm else None
        )
        self.cat_heads = nn.ModuleDict({f.name: nn.Linear(d, f.vocab_size) for f in schema.categorical})
        self.num_heads = nn.ModuleDict({f.name: nn.Linear(d, 1) for f in schema.numeric})
        self.dt_head = nn.Linear(d, 1)

    def _memory(self, h: torch.Tensor) -> torch.Tensor:
        return self.memory_proj(self.memory_norm(h)).unsqueeze(1)

    def _decode_tokens(self, tokens: torch.Tensor, memory: torch.Tensor) -> torch.Tensor:
        """tokens: B x T x d already shifted (start token first)."""
        length = tokens.shape[1]
        if self.config.positional == "sinusoidal":
            tokens = tokens + sinusoidal_positions(length, tokens.shape[-1], tokens.dtype, tokens.device)
        return self.decoder(tokens, memory, tgt_mask=causal_mask(length, tokens.dtype, tokens.device))

    def _heads(self, states: torch.Tensor) -> DecoderOutput:
        return DecoderOutput(
            cat_logits={name: head(states) for name, head in self.cat_heads.items()},
            num={name: head(states).squeeze(-1) for name, head in self.num_heads.items()},
            dt=self.dt_head(states).squeeze(-1),
        )

    def forward(self, h: torch.Tensor, batch: PaddedBatch) -> DecoderOutput:
        """
        Predict every event of ``batch`` from the events before it and ``h``.

        Args:
            h: Sequence embeddings B x H from the encoder over the same batch
            batch: Teacher-forcing inputs

        Returns:
            Predictions aligned with the events of ``batch``
        """
        tokens = self.input_proj(self.embedder(batch))
        start = self.start_token.to(tokens.dtype).expand(tokens.shape[0], 1, -1)
        shifted = torch.cat([start, tokens[:, :-1]], dim=1)
        return self._heads(self._decode_tokens(shifted, self._memory(h)))

    @torch.no_grad()
    def sample(
        self,
        h: torch.Tensor,
        max_len: int,
        generator: Optional[torch.Generator] = None,
        greedy: bool = False,
        id_prefix: str = "generated",
    ) -> List[EventSequence]:
        """
        Roll out ``max_len`` events per embedding.

        Categorical values are drawn from the softmax over real codes (greedy
        takes the argmax), numeric values and time deltas are the predicted
        point values, and deltas are clamped at zero so times never decrease.
        """
        b = h.shape[0]
        memory = self._memory(h)
        tokens = self.start_token.to(h.dtype).expand(b, 1, -1)
        cat: Dict[str, List[torch.Tensor]] = {name: [] for name in self.cat_heads}
        num: Dict[str, List[torch.Tensor]] = {name: [] for name in self.num_heads}
        deltas: List[torch.Tensor] = []

        for step in range(max_len):
            states = self._decode_tokens(tokens, memory)[:, -1:]
            out = self._heads(states)
            step_cat = {}
            for name, logits in out.cat_logits.items():
                logits = logits[:, 0].clone()
                logits[:, PAD_CODE] = float("-inf")
                if greedy:
                    code = logits.argmax(dim=-1)
                else:
                    code = torch.multinomial(torch.softmax(logits, dim=-1), 1, generator=generator).squeeze(-1)
                step_cat[name] = code.unsqueeze(1)
                cat[name].append(code)
            step_num = {name: value[:, :1] for name, value in out.num.items()}
            for name, value in step_num.items():
                num[name].append(value[:, 0])
            dt = out.dt[:, :1].clamp_min(0.0) if step > 0 else torch.zeros_like(out.dt[:, :1])
            deltas.append(dt[:, 0])
            new_token = self.input_proj(self.embedder.embed_values(step_cat, step_num, dt))
            tokens = torch.cat([tokens, new_token], dim=1)

        times = torch.cumsum(torch.stack(deltas, dim=1), dim=1).double()
        sequences = []
        for i in range(b):
            sequences.append(EventSequence.model_construct(
                id=f"{id_prefix}-{i}",
                times=times[i].tolist(),
                cat_values={name: torch.stack(v, dim=1)[i].tolist() for name, v in cat.items()},
                num_values={name: torch.stack(v, dim=1)[i].double().tolist() for name, v in num.items()},
                target=None,
            ))
        return sequences
