"""
Subsequence sampler for the contrastive objective.
"""

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import torch

from ..models.schemas import EventSequence


def sample_subsequences(
    sequence: EventSequence,
    k: int = 2,
    len_range: Tuple[float, float] = (0.4, 0.8),
    rng: Optional[np.random.Generator] = None,
) -> List[EventSequence]:
    """
    Draw ``k`` contiguous, possibly overlapping slices of ``sequence``.

    Each slice length is uniform in ``[ceil(lo*n), floor(hi*n)]`` and its start
    is uniform over the valid offsets. When that range is empty the whole
    sequence is used as every view.
    """
    if k < 2:
        raise ValueError(f"need at least two views, got {k}")
    lo, hi = len_range
    if not 0 < lo <= hi <= 1:
        raise ValueError(f"invalid view length range {len_range}")
    rng = rng if rng is not None else np.random.default_rng()

    n = len(sequence)
    min_len = max(1, math.ceil(lo * n))
    max_len = math.floor(hi * n)
    if max_len < min_len:
        return [sequence] * k

    views = []
    for _ in range(k):
        length = int(rng.integers(min_len, max_len + 1))
        start = int(rng.integers(0, n - length + 1))
        views.append(sequence.select(list(range(start, start + length))))
    return views


def sample_views(
    sequences: Sequence[EventSequence],
    k: int,
    len_range: Tuple[float, float],
    rng: np.random.Generator,
) -> Tuple[List[EventSequence], np.ndarray]:
    """Views of every sequence plus the index of the sequence each view came from."""
    views: List[EventSequence] = []
    origins: List[int] = []
    for i, seq in enumerate(sequences):
        views.extend(sample_subsequences(seq, k, len_range, rng))
        origins.extend([i] * k)
    return views, np.asarray(origins, dtype=np.int64)


def pair_labels(origins, positive: float = 1.0, negative: float = 0.0, dtype=torch.float32) -> torch.Tensor:
    """B' x B' matrix: ``positive`` where both embeddings share a source sequence."""
    origins = torch.as_tensor(origins)
    same = origins.unsqueeze(0) == origins.unsqueeze(1)
    return torch.where(same, torch.tensor(positive, dtype=dtype), torch.tensor(negative, dtype=dtype))
