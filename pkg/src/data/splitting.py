"""
Deterministic train / validation / test splitting.
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..core.errors import ConfigError
from .dataset import Dataset


def _check_ratios(ratios: Sequence[float]) -> Tuple[float, float, float]:
    if len(ratios) != 3:
        raise ConfigError(f"expected three split ratios, got {list(ratios)}")
    if any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must be positive and sum to 1, got {list(ratios)}")
    return tuple(float(r) for r in ratios)  # type: ignore[return-value]


def assign_split_tags(dataset: Dataset, ratios: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0) -> Dataset:
    """
    Tag every sequence train / val / test.

    An existing ``test`` tag is kept and only train / val are drawn from the
    remaining sequences, in proportion ``ratios[0] : ratios[1]``.
    """
    r_train, r_val, r_test = _check_ratios(ratios)
    n = len(dataset)
    rng = np.random.default_rng(seed)
    tags: List[str] = [""] * n

    if dataset.split_tags is not None and "test" in dataset.split_tags:
        pool = [i for i, t in enumerate(dataset.split_tags) if t != "test"]
        for i, t in enumerate(dataset.split_tags):
            if t == "test":
                tags[i] = "test"
        n_train = int(round(len(pool) * r_train / (r_train + r_val)))
        n_val = len(pool) - n_train
    else:
        pool = list(range(n))
        n_train = int(round(n * r_train))
        n_val = int(round(n * r_val))
        n_val = min(n_val, n - n_train)

    order = rng.permutation(len(pool))
    for rank, k in enumerate(order.tolist()):
        i = pool[k]
        if rank < n_train:
            tags[i] = "train"
        elif rank < n_train + n_val:
            tags[i] = "val"
        else:
            tags[i] = "test"
    return dataset.with_sequences(dataset.sequences, tags)


def split(dataset: Dataset, ratios: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0) -> Tuple[Dataset, Dataset, Dataset]:
    """
    Partition ``dataset`` into (train, val, test); repeatable for a fixed seed.

    Args:
        dataset: Dataset to partition
        ratios: Train / val / test fractions, positive and summing to 1
        seed: Permutation seed

    Returns:
        Three datasets whose union is the input
    """
    tagged = assign_split_tags(dataset, ratios, seed)
    return tagged.subset("train"), tagged.subset("val"), tagged.subset("test")
