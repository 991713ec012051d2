"""Training objectives."""

from .sampling import sample_subsequences, sample_views, pair_labels
from .losses import (
    contrastive_pair_terms,
    contrastive_loss,
    lm_loss_terms,
    lm_loss,
    alignment_logits,
    alignment_loss,
    naive_hybrid_loss,
    mlem_loss,
)

__all__ = [
    "sample_subsequences",
    "sample_views",
    "pair_labels",
    "contrastive_pair_terms",
    "contrastive_loss",
    "lm_loss_terms",
    "lm_loss",
    "alignment_logits",
    "alignment_loss",
    "naive_hybrid_loss",
    "mlem_loss",
]
