"""
Optimizer construction and the single update step used by all trainers.
"""

from typing import Iterable, Optional, Sequence

import torch
from torch import nn

from ..models.schemas import TrainConfig


def trainable_parameters(module: nn.Module) -> list:
    """Parameters with ``requires_grad``; shared modules appear once."""
    return [p for p in module.parameters() if p.requires_grad]


def build_optimizer(params: Iterable[torch.nn.Parameter], config: TrainConfig) -> torch.optim.AdamW:
    """Decoupled weight-decay Adam with the configured settings, constant learning rate."""
    return torch.optim.AdamW(
        list(params),
        lr=config.lr,
        betas=tuple(config.betas),
        weight_decay=config.weight_decay,
        foreach=False,
    )


def clip_gradients(params: Sequence[torch.Tensor], max_norm: Optional[float]) -> float:
    """Clip to a global L2 norm; returns the norm before clipping."""
    grads = [p for p in params if p.grad is not None]
    if not grads:
        return 0.0
    if max_norm is None:
        return float(torch.linalg.vector_norm(torch.stack([torch.linalg.vector_norm(p.grad) for p in grads])))
    return float(torch.nn.utils.clip_grad_norm_(grads, max_norm))


def adamw_step(
    optimizer: torch.optim.Optimizer,
    grads: Optional[Sequence[torch.Tensor]] = None,
    max_norm: Optional[float] = None,
) -> float:
    """
    Apply one AdamW update.

    Args:
        optimizer: Optimizer owning the parameters
        grads: Explicit gradients, in parameter order; ``p.grad`` is used when omitted
        max_norm: Global gradient-norm clip

    Returns:
        Gradient norm before clipping
    """
    params = [p for group in optimizer.param_groups for p in group["params"]]
    if grads is not None:
        if len(grads) != len(params):
            raise ValueError(f"got {len(grads)} gradients for {len(params)} parameters")
        for p, g in zip(params, grads):
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {tuple(g.shape)} does not match parameter {tuple(p.shape)}")
            p.grad = g.detach().to(p.dtype).clone()
    norm = clip_gradients(params, max_norm)
    optimizer.step()
    return norm
