"""
Contrastive pre-training on random subsequence views.
"""

from typing import Dict, List, Tuple

import numpy as np
import torch

from ..data.batching import pad_batch
from ..models.schemas import EventSequence
from ..objectives.losses import contrastive_loss
from ..objectives.sampling import pair_labels, sample_views
from .base import BaseTrainer


class ContrastiveTrainer(BaseTrainer):
    """Encoder and projector trained with the margin loss over view pairs."""

    method = "contrastive"

    def view_loss(self, sequences: List[EventSequence], rng: np.random.Generator) -> torch.Tensor:
        views, origins = sample_views(sequences, self.config.n_views, self.config.view_range, rng)
        h = self.modules["encoder"](pad_batch(views))
        z = self.modules["projector"](h)
        labels = pair_labels(origins, dtype=z.dtype)
        return contrastive_loss(z, labels, self.config.margin, n_sources=len(sequences))

    def compute_loss(
        self, sequences: List[EventSequence], rng: np.random.Generator
    ) -> Tuple[torch.Tensor, Dict[str, float]]:
        loss = self.view_loss(sequences, rng)
        return loss, {"contrastive": float(loss.detach())}
