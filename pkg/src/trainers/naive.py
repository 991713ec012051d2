"""
Naive hybrid: one encoder optimised for reconstruction and contrast at once.
"""

from typing import Dict, List, Tuple

import numpy as np
import torch

from ..data.batching import pad_batch
from ..models.schemas import EventSequence
from ..objectives.losses import naive_hybrid_loss
from .contrastive import ContrastiveTrainer
from .generative import GenerativeTrainer


class NaiveHybridTrainer(GenerativeTrainer, ContrastiveTrainer):
    """alpha * next-event loss on the full batch + beta * contrastive loss on its views."""

    method = "naive"

    def compute_loss(
        self, sequences: List[EventSequence], rng: np.random.Generator
    ) -> Tuple[torch.Tensor, Dict[str, float]]:
        _, lm, parts = self.lm_terms(pad_batch(sequences))
        con = self.view_loss(sequences, rng)
        parts["contrastive"] = float(con.detach())
        return naive_hybrid_loss(lm, con, self.config.alpha, self.config.beta), parts
