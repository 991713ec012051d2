"""
Sequences reconstructed from embeddings by a trained decoder, and a
histogram distance between real and generated feature distributions.
"""

from typing import Dict, Optional

import numpy as np
import torch

from ..core.checkpoint import ModelCheckpoint
from ..core.errors import CheckpointError
from ..core.logger import get_logger
from ..data.batching import iterate_batches, pad_batch
from ..data.dataset import Dataset
from ..utils.seeding import torch_generator


logger = get_logger(__name__)


@torch.no_grad()
def generate_from_embeddings(
    checkpoint: ModelCheckpoint,
    dataset: Dataset,
    max_len: Optional[int] = None,
    seed: int = 0,
    greedy: bool = False,
    batch_size: int = 256,
) -> Dataset:
    """
    Encode each sequence and let the decoder roll out a new one from its embedding.

    Every generated sequence has the length of its source (capped at
    ``max_len``), starts at the source's first timestamp and keeps its target.

    Raises:
        CheckpointError: for checkpoints without a decoder
    """
    checkpoint.check_schema(dataset.schema)
    if "decoder" not in checkpoint.state:
        raise CheckpointError(f"{checkpoint.method} checkpoint has no decoder to generate with")
    modules = checkpoint.build()
    modules.eval()
    generator = torch_generator(seed)

    generated = []
    for chunk in iterate_batches(dataset.sequences, batch_size):
        h = modules["encoder"](pad_batch(chunk))
        longest = max(len(s) for s in chunk)
        rollout = modules["decoder"].sample(h, min(longest, max_len or longest), generator, greedy)
        for source, seq in zip(chunk, rollout):
            n = min(len(source), len(seq))
            t0 = source.times[0]
            generated.append(seq.select(
                list(range(n)),
                id=f"gen-{source.id}",
                times=[t0 + t for t in seq.times[:n]],
                target=source.target,
            ))
    logger.info(f"Generated {len(generated)} sequences with the {checkpoint.method} decoder")
    return dataset.with_sequences(generated, dataset.split_tags)


def _total_variation(p: np.ndarray, q: np.ndarray) -> float:
    p = p / p.sum() if p.sum() > 0 else p
    q = q / q.sum() if q.sum() > 0 else q
    return float(0.5 * np.abs(p - q).sum())


def feature_distribution_distance(real: Dataset, generated: Dataset, bins: int = 20) -> Dict[str, float]:
    """
    Total-variation distance between the per-event marginals of every feature.

    Categorical features compare code frequencies; numeric features and the
    time delta (key ``"dt"``) compare histograms over shared bins.
    """
    distances: Dict[str, float] = {}
    for feature in real.schema.categorical:
        counts = [
            np.bincount(np.concatenate([s.cat_values[feature.name] for s in data.sequences]).astype(np.int64),
                        minlength=feature.vocab_size)[:feature.vocab_size]
            for data in (real, generated)
        ]
        distances[feature.name] = _total_variation(*counts)

    def values(data: Dataset, name: str) -> np.ndarray:
        if name == "dt":
            return np.concatenate([np.diff(s.times) for s in data.sequences])
        return np.concatenate([s.num_values[name] for s in data.sequences]).astype(np.float64)

    for name in [*real.schema.numeric_names, "dt"]:
        a, b = values(real, name), values(generated, name)
        if a.size == 0 or b.size == 0:
            continue
        edges = np.histogram_bin_edges(np.concatenate([a, b]), bins=bins)
        distances[name] = _total_variation(np.histogram(a, edges)[0].astype(float),
                                           np.histogram(b, edges)[0].astype(float))
    return distances
