"""
Padding of event sequences into fixed-shape tensor batches.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np
import torch

from ..models.schemas import PAD_CODE, EventSequence


@dataclass
class PaddedBatch:
    """
    B sequences left-aligned and padded to a common length T.

    Times, numeric values and ``dt`` are kept in float64 so that unpadding is
    exact; modules cast them to their own dtype.
    """

    ids: List[str]
    times: torch.Tensor                    # B x T float64
    dt: torch.Tensor                       # B x T float64, 0 at position 0
    mask: torch.Tensor                     # B x T bool, prefix-true
    cat: Dict[str, torch.Tensor] = field(default_factory=dict)   # B x T long, PAD_CODE outside mask
    num: Dict[str, torch.Tensor] = field(default_factory=dict)   # B x T float64, 0 outside mask
    targets: Optional[torch.Tensor] = None  # B float64, NaN where absent

    @property
    def batch_size(self) -> int:
        return self.mask.shape[0]

    @property
    def max_len(self) -> int:
        return self.mask.shape[1]

    @property
    def lengths(self) -> torch.Tensor:
        return self.mask.sum(dim=1)

    def to(self, device: torch.device) -> "PaddedBatch":
        return replace(
            self,
            times=self.times.to(device),
            dt=self.dt.to(device),
            mask=self.mask.to(device),
            cat={k: v.to(device) for k, v in self.cat.items()},
            num={k: v.to(device) for k, v in self.num.items()},
            targets=None if self.targets is None else self.targets.to(device),
        )


def pad_batch(sequences: Sequence[EventSequence]) -> PaddedBatch:
    """
    Pad sequences to the longest one.

    ``dt[j] = t[j] - t[j-1]`` for ``j >= 1`` and ``dt[0] = 0``; the mask marks
    real events.
    """
    if not sequences:
        raise ValueError("cannot pad an empty list of sequences")

    b = len(sequences)
    t_max = max(len(s) for s in sequences)
    times = np.zeros((b, t_max), dtype=np.float64)
    mask = np.zeros((b, t_max), dtype=bool)
    first = sequences[0]
    cat = {name: np.full((b, t_max), PAD_CODE, dtype=np.int64) for name in first.cat_values}
    num = {name: np.zeros((b, t_max), dtype=np.float64) for name in first.num_values}
    targets = np.full(b, np.nan, dtype=np.float64)

    for i, seq in enumerate(sequences):
        n = len(seq)
        times[i, :n] = seq.times
        mask[i, :n] = True
        for name in cat:
            cat[name][i, :n] = seq.cat_values[name]
        for name in num:
            num[name][i, :n] = seq.num_values[name]
        if seq.target is not None:
            targets[i] = seq.target

    dt = np.zeros_like(times)
    dt[:, 1:] = np.where(mask[:, 1:], times[:, 1:] - times[:, :-1], 0.0)

    return PaddedBatch(
        ids=[s.id for s in sequences],
        times=torch.from_numpy(times),
        dt=torch.from_numpy(dt),
        mask=torch.from_numpy(mask),
        cat={k: torch.from_numpy(v) for k, v in cat.items()},
        num={k: torch.from_numpy(v) for k, v in num.items()},
        targets=torch.from_numpy(targets),
    )


def unpad_batch(batch: PaddedBatch) -> List[EventSequence]:
    """Inverse of :func:`pad_batch`: apply the mask row by row."""
    sequences = []
    lengths = batch.lengths.tolist()
    for i, n in enumerate(lengths):
        target = batch.targets[i].item() if batch.targets is not None else float("nan")
        sequences.append(EventSequence.model_construct(
            id=batch.ids[i],
            times=batch.times[i, :n].tolist(),
            cat_values={k: v[i, :n].tolist() for k, v in batch.cat.items()},
            num_values={k: v[i, :n].tolist() for k, v in batch.num.items()},
            target=None if target != target else target,
        ))
    return sequences


def iterate_batches(
    sequences: Sequence[EventSequence],
    batch_size: int,
    rng: Optional[np.random.Generator] = None,
    drop_last: bool = False,
) -> Iterator[List[EventSequence]]:
    """Yield lists of sequences; shuffled when ``rng`` is given."""
    order = np.arange(len(sequences)) if rng is None else rng.permutation(len(sequences))
    for start in range(0, len(order), batch_size):
        chunk = order[start:start + batch_size]
        if drop_last and len(chunk) < batch_size:
            break
        yield [sequences[i] for i in chunk.tolist()]
