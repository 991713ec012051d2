"""Data package initialization."""

from .dataset import Dataset, load_dataset, save_dataset, load_csv_events, load_schema, save_schema
from .preprocessing import consolidate_rare_categories, normalize_time, truncate_recent, aggregate_intervals
from .splitting import split, assign_split_tags
from .batching import PaddedBatch, pad_batch, unpad_batch, iterate_batches

__all__ = [
    "Dataset",
    "load_dataset",
    "save_dataset",
    "load_csv_events",
    "load_schema",
    "save_schema",
    "consolidate_rare_categories",
    "normalize_time",
    "truncate_recent",
    "aggregate_intervals",
    "split",
    "assign_split_tags",
    "PaddedBatch",
    "pad_batch",
    "unpad_batch",
    "iterate_batches",
]
