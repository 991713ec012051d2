"""
Event-level perturbations for robustness tests.
"""

from typing import Optional

import numpy as np

from ..data.dataset import Dataset


def perturb_shuffle(dataset: Dataset, rng: Optional[np.random.Generator] = None) -> Dataset:
    """
    Put the events of every sequence in a uniformly random order.

    Whole events move with their timestamps, so time deltas computed from the
    new order may be negative. Targets are kept.
    """
    rng = rng if rng is not None else np.random.default_rng()
    shuffled = [seq.select(rng.permutation(len(seq)).tolist()) for seq in dataset.sequences]
    return dataset.with_sequences(shuffled, dataset.split_tags)


def perturb_dropout(dataset: Dataset, p: float, rng: Optional[np.random.Generator] = None) -> Dataset:
    """
    Remove each event independently with probability ``p``.

    A sequence that would lose every event is redrawn, so each keeps at least one.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    rng = rng if rng is not None else np.random.default_rng()
    kept = []
    for seq in dataset.sequences:
        keep = rng.random(len(seq)) >= p
        while not keep.any():
            keep = rng.random(len(seq)) >= p
        kept.append(seq.select(np.flatnonzero(keep).tolist()))
    return dataset.with_sequences(kept, dataset.split_tags)
