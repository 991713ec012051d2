"""
Generative pre-training: the encoder summarises a sequence and the decoder
reconstructs it event by event under teacher forcing.
"""

from typing import Dict, List, Tuple

import numpy as np
import torch

from ..data.batching import PaddedBatch, pad_batch
from ..models.schemas import EventSequence
from ..objectives.losses import lm_loss_terms
from .base import BaseTrainer


class GenerativeTrainer(BaseTrainer):
    """Encoder plus decoder trained with the next-event loss."""

    method = "generative"

    def lm_terms(self, batch: PaddedBatch) -> Tuple[torch.Tensor, torch.Tensor, Dict[str, float]]:
        """Embeddings, summed next-event loss and its per-feature parts."""
        h = self.modules["encoder"](batch)
        terms = lm_loss_terms(self.modules["decoder"](h, batch), batch, self.schema)
        lm = torch.stack(list(terms.values())).sum()
        parts = {f"lm/{name}": float(term.detach()) for name, term in terms.items()}
        parts["lm"] = float(lm.detach())
        return h, lm, parts

    def compute_loss(
        self, sequences: List[EventSequence], rng: np.random.Generator
    ) -> Tuple[torch.Tensor, Dict[str, float]]:
        _, lm, parts = self.lm_terms(pad_batch(sequences))
        return lm, parts
