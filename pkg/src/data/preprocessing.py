"""
Dataset preprocessing: rare-category consolidation, time normalisation,
truncation to the most recent events and fixed-window aggregation.

Every function returns a new Dataset and leaves its input untouched.
"""

import math
from collections import Counter
from typing import Dict, List, Literal

import numpy as np

from ..core.logger import get_logger
from ..models.schemas import FIRST_CATEGORY_CODE, RARE_CODE, EventSequence
from .dataset import Dataset


logger = get_logger(__name__)


def consolidate_rare_categories(dataset: Dataset, min_count: int = 500) -> Dataset:
    """
    Remap every categorical value seen fewer than ``min_count`` times to RARE.

    Surviving values are renumbered compactly from code 2 in their original
    order, so the operation is idempotent.
    """
    mappings: Dict[str, Dict[int, int]] = {}
    new_features = []
    for feature in dataset.schema.categorical:
        counts = Counter(code for seq in dataset.sequences for code in seq.cat_values[feature.name])
        mapping: Dict[int, int] = {RARE_CODE: RARE_CODE}
        kept_labels: List[str] = []
        next_code = FIRST_CATEGORY_CODE
        for code in sorted(counts):
            if code == RARE_CODE:
                continue
            if counts[code] >= min_count:
                mapping[code] = next_code
                next_code += 1
                if feature.vocabulary is not None:
                    kept_labels.append(feature.vocabulary[code - FIRST_CATEGORY_CODE])
            else:
                mapping[code] = RARE_CODE
        mappings[feature.name] = mapping
        n_rare = sum(c for code, c in counts.items() if mapping[code] == RARE_CODE)
        logger.debug(f"'{feature.name}': kept {next_code - FIRST_CATEGORY_CODE} values, {n_rare} events -> RARE")
        new_features.append(feature.model_copy(update={
            "vocab_size": next_code,
            "vocabulary": kept_labels if feature.vocabulary is not None else None,
        }))

    schema = dataset.schema.model_copy(update={"categorical": new_features})
    sequences = [
        seq.model_copy(update={
            "cat_values": {
                name: [mappings[name][c] for c in codes] for name, codes in seq.cat_values.items()
            }
        })
        for seq in dataset.sequences
    ]
    return Dataset(schema, sequences, dataset.split_tags, dataset.name)


def normalize_time(dataset: Dataset, scope: Literal["sequence", "dataset"] = "sequence") -> Dataset:
    """
    Min-max map timestamps to [0, 1].

    ``scope="sequence"`` normalises each sequence on its own span; a sequence
    with zero span (for example a single event) maps to all zeros.
    ``scope="dataset"`` uses one global span for every sequence.
    """
    if scope not in ("sequence", "dataset"):
        raise ValueError(f"unknown normalisation scope '{scope}'")

    if scope == "dataset" and dataset.sequences:
        lo = min(seq.times[0] for seq in dataset.sequences)
        hi = max(seq.times[-1] for seq in dataset.sequences)
    sequences = []
    for seq in dataset.sequences:
        if scope == "sequence":
            lo, hi = seq.times[0], seq.times[-1]
        span = hi - lo
        times = [(t - lo) / span for t in seq.times] if span > 0 else [0.0] * len(seq.times)
        sequences.append(seq.model_copy(update={"times": times}))
    schema = dataset.schema.model_copy(update={"time_unit": "normalized"})
    return Dataset(schema, sequences, dataset.split_tags, dataset.name)


def truncate_recent(dataset: Dataset, n: int) -> Dataset:
    """Keep only the ``n`` most recent events of each sequence."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    sequences = []
    for seq in dataset.sequences:
        if len(seq) <= n:
            sequences.append(seq)
        else:
            sequences.append(seq.select(list(range(len(seq) - n, len(seq)))))
    return dataset.with_sequences(sequences, dataset.split_tags)


def aggregate_intervals(dataset: Dataset, window: float = 360.0, missing_fill: float = -1.0) -> Dataset:
    """
    Collapse raw-time events into consecutive windows ``[k*window, (k+1)*window)``.

    Numeric values are averaged over the non-missing (non-NaN) measurements of
    a window and set to ``missing_fill`` when a feature was never measured.
    Categorical features keep the last code of the window. Windows without
    events emit nothing; the output event is stamped at the window start.
    """
    if window <= 0:
        raise ValueError(f"window must be positive, got {window}")

    sequences = []
    for seq in dataset.sequences:
        slots = np.floor(np.asarray(seq.times, dtype=np.float64) / window).astype(np.int64)
        order: List[int] = []
        members: Dict[int, List[int]] = {}
        for i, slot in enumerate(slots.tolist()):
            if slot not in members:
                members[slot] = []
                order.append(slot)
            members[slot].append(i)

        times: List[float] = []
        cat: Dict[str, List[int]] = {name: [] for name in seq.cat_values}
        num: Dict[str, List[float]] = {name: [] for name in seq.num_values}
        for slot in order:
            idx = members[slot]
            times.append(slot * window)
            for name, codes in seq.cat_values.items():
                cat[name].append(codes[idx[-1]])
            for name, values in seq.num_values.items():
                present = [values[i] for i in idx if not math.isnan(values[i])]
                num[name].append(float(np.mean(present)) if present else missing_fill)
        sequences.append(EventSequence.model_construct(
            id=seq.id, times=times, cat_values=cat, num_values=num, target=seq.target,
        ))
    logger.info(f"Aggregated {len(sequences)} sequences into {window:g}-unit windows")
    return dataset.with_sequences(sequences, dataset.split_tags)
