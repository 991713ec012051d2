"""
Generative training aligned with a frozen, previously trained contrastive encoder.
"""

from typing import Dict, List, Tuple

import numpy as np
import torch
from torch import nn

from ..core.checkpoint import ModelCheckpoint
from ..core.errors import CheckpointError
from ..data.batching import pad_batch
from ..models.schemas import EventSequence, FeatureSchema
from ..objectives.losses import alignment_loss, mlem_loss
from .generative import GenerativeTrainer


class MLEMTrainer(GenerativeTrainer):
    """
    Next-event loss plus a sigmoid alignment loss pulling the generative
    embedding of each sequence towards the contrastive embedding of the same
    sequence and away from the others.

    The contrastive encoder is loaded from ``contrastive_checkpoint`` and stays
    frozen; the alignment temperature and bias are learned.
    """

    method = "mlem"

    def __init__(self, schema: FeatureSchema, contrastive_checkpoint: ModelCheckpoint, *args, **kwargs):
        super().__init__(schema, *args, **kwargs)
        contrastive_checkpoint.check_schema(schema)
        if "encoder" not in contrastive_checkpoint.state:
            raise CheckpointError(f"{contrastive_checkpoint.method} checkpoint has no encoder")
        if contrastive_checkpoint.encoder_config != self.encoder_config:
            self.logger.warning(
                f"Using the contrastive encoder sizes {contrastive_checkpoint.encoder_config.model_dump()} "
                f"instead of {self.encoder_config.model_dump()}"
            )
            self.encoder_config = contrastive_checkpoint.encoder_config
        self.contrastive_checkpoint = contrastive_checkpoint

    def build(self) -> nn.ModuleDict:
        modules = super().build()
        frozen = modules["contrastive_encoder"]
        frozen.load_state_dict({k: v.to(self.dtype) for k, v in self.contrastive_checkpoint.state["encoder"].items()})
        frozen.requires_grad_(False)
        frozen.eval()
        return modules

    def frozen_groups(self) -> Tuple[str, ...]:
        return ("contrastive_encoder",)

    def compute_loss(
        self, sequences: List[EventSequence], rng: np.random.Generator
    ) -> Tuple[torch.Tensor, Dict[str, float]]:
        batch = pad_batch(sequences)
        h_gen, lm, parts = self.lm_terms(batch)
        with torch.no_grad():
            h_con = self.modules["contrastive_encoder"](batch)
        n = len(sequences)
        labels = 2.0 * torch.eye(n, dtype=h_gen.dtype) - 1.0
        scalars = self.modules["align"]
        align = alignment_loss(h_gen, h_con, labels, scalars.t, scalars.b, n_sources=n)
        parts.update({
            "align": float(align.detach()),
            "t": float(scalars.t.detach()),
            "b": float(scalars.b.detach()),
        })
        return mlem_loss(lm, align, self.config.alpha, self.config.beta), parts
