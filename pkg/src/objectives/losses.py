"""
Training objectives: contrastive margin loss, next-event language-model
loss, sigmoid alignment loss and the two hybrid combinations.
"""

from typing import Dict, Optional

import torch
import torch.nn.functional as F

from ..data.batching import PaddedBatch
from ..models.schemas import FeatureSchema
from ..networks.decoder import DecoderOutput


def contrastive_pair_terms(embeddings: torch.Tensor, labels: torch.Tensor, rho: float = 0.5) -> torch.Tensor:
    """
    Per-pair terms z * 1/2 d^2 + (1 - z) * 1/2 max(0, rho - d)^2.

    Args:
        embeddings: B' x m
        labels: B' x B' with 1 for same-origin pairs, 0 otherwise
        rho: Margin between dissimilar objects

    Returns:
        B' x B' matrix of non-negative terms
    """
    diff = embeddings.unsqueeze(1) - embeddings.unsqueeze(0)
    sq_dist = (diff * diff).sum(dim=-1)
    # zero gradient at coincident points
    dist = sq_dist.clamp_min(1e-30).sqrt()
    labels = labels.to(embeddings.dtype)
    return labels * 0.5 * sq_dist + (1.0 - labels) * 0.5 * F.relu(rho - dist) ** 2


def contrastive_loss(
    embeddings: torch.Tensor, labels: torch.Tensor, rho: float = 0.5, n_sources: Optional[int] = None
) -> torch.Tensor:
    """Sum of pair terms over the whole grid divided by the number of source sequences."""
    if rho <= 0:
        raise ValueError(f"margin must be positive, got {rho}")
    n_sources = n_sources or embeddings.shape[0]
    return contrastive_pair_terms(embeddings, labels, rho).sum() / n_sources


def lm_loss_terms(pred: DecoderOutput, batch: PaddedBatch, schema: FeatureSchema) -> Dict[str, torch.Tensor]:
    """
    Per-feature next-event losses over valid steps.

    Cross-entropy for each categorical, squared error for each numeric feature
    and for the time delta (key ``"dt"``); each mean-reduced over masked steps.
    """
    mask = batch.mask
    terms: Dict[str, torch.Tensor] = {}
    for feature in schema.categorical:
        logits = pred.cat_logits[feature.name][mask]
        terms[feature.name] = F.cross_entropy(logits, batch.cat[feature.name][mask])
    for feature in schema.numeric:
        predicted = pred.num[feature.name][mask]
        target = batch.num[feature.name][mask].to(predicted.dtype)
        terms[feature.name] = F.mse_loss(predicted, target)
    predicted_dt = pred.dt[mask]
    terms["dt"] = F.mse_loss(predicted_dt, batch.dt[mask].to(predicted_dt.dtype))
    return terms


def lm_loss(pred: DecoderOutput, batch: PaddedBatch, schema: FeatureSchema) -> torch.Tensor:
    """L^LM: sum over features of the per-feature losses."""
    return torch.stack(list(lm_loss_terms(pred, batch, schema).values())).sum()


def alignment_logits(h_gen: torch.Tensor, h_con: torch.Tensor, t: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """t * cos(h_gen_i, h_con_j) + b; the contrastive side is detached."""
    s = F.normalize(h_gen, dim=-1) @ F.normalize(h_con.detach(), dim=-1).T
    return t * s + b


def alignment_loss(
    h_gen: torch.Tensor,
    h_con: torch.Tensor,
    labels: torch.Tensor,
    t: torch.Tensor,
    b: torch.Tensor,
    n_sources: Optional[int] = None,
) -> torch.Tensor:
    """
    Pairwise sigmoid alignment of generative to contrastive embeddings.

    Args:
        h_gen: Generative embeddings B x m
        h_con: Frozen contrastive embeddings B x m
        labels: B x B, +1 for same-sequence pairs and -1 otherwise
        t: Temperature (> 0)
        b: Bias

    Returns:
        (1/|C|) sum_ij -log sigmoid(z_ij (t s_ij + b))
    """
    n_sources = n_sources or h_gen.shape[0]
    logits = alignment_logits(h_gen, h_con, t, b)
    return -F.logsigmoid(labels.to(logits.dtype) * logits).sum() / n_sources


def naive_hybrid_loss(lm: torch.Tensor, con: torch.Tensor, alpha: float = 1.0, beta: float = 10.0) -> torch.Tensor:
    """alpha * L^LM + beta * L^con on one shared encoder."""
    return alpha * lm + beta * con


def mlem_loss(lm: torch.Tensor, align: torch.Tensor, alpha: float = 1.0, beta: float = 10.0) -> torch.Tensor:
    """alpha * L^LM + beta * L^align against the frozen contrastive encoder."""
    return alpha * lm + beta * align
