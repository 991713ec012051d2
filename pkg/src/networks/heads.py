"""
Small heads placed on top of the sequence embedding.
"""

import math
from typing import Optional

import torch
from torch import nn


class Projector(nn.Module):
    """Two-layer feed-forward projector used only inside the contrastive loss."""

    def __init__(self, in_dim: int, out_dim: int = 256, hidden_dim: Optional[int] = None):
        super().__init__()
        hidden_dim = hidden_dim or in_dim
        self.net = nn.Sequential(
            nn.Linear(in_dim, hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, out_dim),
        )

    def init_identity(self):
        """Degenerate weights copying the first ``out_dim`` non-negative inputs."""
        with torch.no_grad():
            for layer in (self.net[0], self.net[2]):
                layer.weight.copy_(torch.eye(layer.out_features, layer.in_features))
                layer.bias.zero_()
        return self

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return self.net(h)


class LinearHead(nn.Module):
    """Linear map from the embedding to class logits or a scalar."""

    def __init__(self, in_dim: int, out_dim: int):
        super().__init__()
        self.linear = nn.Linear(in_dim, out_dim)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        return self.linear(h)


class AlignmentScalars(nn.Module):
    """Learnable temperature (stored as its log) and bias of the alignment loss."""

    def __init__(self, temperature: float = 10.0, bias: float = -10.0):
        super().__init__()
        self.log_t = nn.Parameter(torch.tensor(math.log(temperature)))
        self.b = nn.Parameter(torch.tensor(bias))

    @property
    def t(self) -> torch.Tensor:
        return self.log_t.exp()
