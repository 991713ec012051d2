"""
Seeding and deterministic execution.
"""

import random
from contextlib import contextmanager
from typing import Iterator

import numpy as np
import torch


def seed_everything(seed: int) -> np.random.Generator:
    """
    Seed python, numpy and torch.

    Returns:
        numpy Generator seeded with ``seed``
    """
    random.seed(seed)
    np.random.seed(seed % (2 ** 32))
    torch.manual_seed(seed)
    return np.random.default_rng(seed)


@contextmanager
def deterministic_mode(enabled: bool = True) -> Iterator[None]:
    """
    Deterministic, single-threaded torch kernels inside the block.

    Both settings are process-wide in torch; the previous values are restored
    on exit, so nested blocks and callers outside a run are unaffected.
    """
    if not enabled:
        yield
        return
    algorithms = torch.are_deterministic_algorithms_enabled()
    warn_only = torch.is_deterministic_algorithms_warn_only_enabled()
    threads = torch.get_num_threads()
    torch.use_deterministic_algorithms(True)
    torch.set_num_threads(1)
    try:
        yield
    finally:
        torch.use_deterministic_algorithms(algorithms, warn_only=warn_only)
        torch.set_num_threads(threads)


def torch_generator(seed: int) -> torch.Generator:
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator
