"""
Dataset container and file formats.

Two on-disk formats are supported:

* JSON-lines, one sequence per line
  ``{"id": str, "t": [...], "cat": {name: [...]}, "num": {name: [...]}, "target": x|null}``
  with an optional ``"split"`` key, plus a sidecar ``<stem>.schema.json``.
* A flat CSV event table (``id, time, <features...>[, target][, split]``).
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..core.errors import DatasetFormatError
from ..core.logger import get_logger
from ..models.schemas import EventSequence, FeatureSchema


logger = get_logger(__name__)

JSONL_SUFFIXES = {".jsonl", ".json", ".ndjson"}


@dataclass
class Dataset:
    """A schema plus the sequences conforming to it."""

    schema: FeatureSchema
    sequences: List[EventSequence] = field(default_factory=list)
    split_tags: Optional[List[str]] = None
    name: str = "dataset"

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def with_sequences(self, sequences: List[EventSequence], split_tags: Optional[List[str]] = None) -> "Dataset":
        """Copy sharing schema and name, with new sequences."""
        return Dataset(schema=self.schema, sequences=list(sequences), split_tags=split_tags, name=self.name)

    def subset(self, tag: str) -> "Dataset":
        """Sequences carrying split tag ``tag``."""
        if self.split_tags is None:
            raise ValueError(f"dataset '{self.name}' has no split tags")
        picked = [s for s, t in zip(self.sequences, self.split_tags) if t == tag]
        return Dataset(self.schema, picked, [tag] * len(picked), self.name)

    def targets(self) -> np.ndarray:
        """Targets as float array (NaN where absent)."""
        return np.array([np.nan if s.target is None else s.target for s in self.sequences], dtype=np.float64)

    def lengths(self) -> np.ndarray:
        return np.array([len(s) for s in self.sequences], dtype=np.int64)

    def conform(self):
        """Check every sequence against the schema; raise DatasetFormatError on the first violation."""
        if self.split_tags is not None:
            if len(self.split_tags) != len(self.sequences):
                raise DatasetFormatError("split tags do not cover every sequence")
            bad = set(self.split_tags) - {"train", "val", "test"}
            if bad:
                raise DatasetFormatError(f"unknown split tags {sorted(bad)}")
        for seq in self.sequences:
            check_sequence(seq, self.schema)


def check_sequence(seq: EventSequence, schema: FeatureSchema, line: Optional[int] = None):
    """Validate columns and code ranges of one sequence."""
    expected_cat = set(schema.categorical_names)
    expected_num = set(schema.numeric_names)
    if set(seq.cat_values) != expected_cat:
        raise DatasetFormatError(
            f"categorical columns {sorted(seq.cat_values)} differ from schema {sorted(expected_cat)}",
            line=line, sequence_id=seq.id,
        )
    if set(seq.num_values) != expected_num:
        raise DatasetFormatError(
            f"numeric columns {sorted(seq.num_values)} differ from schema {sorted(expected_num)}",
            line=line, sequence_id=seq.id,
        )
    for feature in schema.categorical:
        for code in seq.cat_values[feature.name]:
            if not 1 <= code < feature.vocab_size:
                raise DatasetFormatError(
                    f"code {code} out of vocab for '{feature.name}' (vocab_size={feature.vocab_size})",
                    line=line, sequence_id=seq.id,
                )


def _parse_record(record: Dict[str, Any], schema: FeatureSchema, line: int) -> EventSequence:
    if not isinstance(record, dict) or "id" not in record or "t" not in record:
        raise DatasetFormatError("malformed record: 'id' and 't' are required", line=line)
    seq_id = str(record["id"])
    times = record["t"]
    if not isinstance(times, list):
        raise DatasetFormatError("malformed record: 't' must be a list", line=line, sequence_id=seq_id)
    for a, b in zip(times, times[1:]):
        if b < a:
            raise DatasetFormatError("timestamps are not ascending", line=line, sequence_id=seq_id)

    try:
        cat = {}
        for name, values in (record.get("cat") or {}).items():
            feature = schema.get_categorical(name)
            cat[name] = [feature.encode(v) for v in values]
        num = {
            name: [math.nan if v is None else float(v) for v in values]
            for name, values in (record.get("num") or {}).items()
        }
        seq = EventSequence(id=seq_id, times=times, cat_values=cat, num_values=num, target=record.get("target"))
    except KeyError as e:
        raise DatasetFormatError(f"categorical column {e} not in schema", line=line, sequence_id=seq_id) from e
    except (ValidationError, ValueError, TypeError) as e:
        raise DatasetFormatError(f"malformed record: {e}", line=line, sequence_id=seq_id) from e

    check_sequence(seq, schema, line=line)
    return seq


def schema_path_for(path: Union[str, Path]) -> Path:
    """Sidecar schema location: ``data/pendulum.jsonl`` -> ``data/pendulum.schema.json``."""
    path = Path(path)
    return path.with_name(path.name.split(".")[0] + ".schema.json")


def load_schema(path: Union[str, Path]) -> FeatureSchema:
    with open(path, "r", encoding="utf-8") as f:
        return FeatureSchema.model_validate(json.load(f))


def save_schema(schema: FeatureSchema, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(schema.model_dump_json(indent=2), encoding="utf-8")
    return path


def load_dataset(path: Union[str, Path], schema: Optional[FeatureSchema] = None) -> Dataset:
    """
    Load a dataset from JSON-lines or a flat CSV event table.

    Args:
        path: Dataset file
        schema: Feature schema; read from the sidecar file when omitted

    Returns:
        Dataset whose sequences satisfy all invariants
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if schema is None:
        schema = load_schema(schema_path_for(path))
    if path.suffix.lower() == ".csv":
        return load_csv_events(path, schema)

    sequences: List[EventSequence] = []
    tags: List[Optional[str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetFormatError(f"malformed record: {e.msg}", line=line_no) from e
            sequences.append(_parse_record(record, schema, line_no))
            tags.append(record.get("split"))

    split_tags = _collect_tags(tags)
    dataset = Dataset(schema=schema, sequences=sequences, split_tags=split_tags, name=path.name.split(".")[0])
    if split_tags is not None:
        dataset.conform()
    logger.info(f"Loaded {len(dataset)} sequences from {path}")
    return dataset


def _collect_tags(tags: List[Optional[str]]) -> Optional[List[str]]:
    if not tags or all(t is None for t in tags):
        return None
    if any(t is None for t in tags):
        raise DatasetFormatError("split tags must be present on every record or on none")
    return list(tags)


def load_csv_events(path: Union[str, Path], schema: FeatureSchema) -> Dataset:
    """
    Import a flat event table with one row per event.

    Rows are grouped by ``id`` in order of first appearance and stably sorted by ``time``.
    """
    path = Path(path)
    df = pd.read_csv(path)
    missing = [c for c in ["id", "time", *schema.feature_names] if c not in df.columns]
    if missing:
        raise DatasetFormatError(f"CSV is missing columns {missing}", line=1)

    df["id"] = df["id"].astype(str)
    sequences: List[EventSequence] = []
    tags: List[Optional[str]] = []
    for seq_id, group in df.groupby("id", sort=False):
        group = group.sort_values("time", kind="mergesort")
        record = {
            "id": seq_id,
            "t": group["time"].astype(float).tolist(),
            "cat": {
                name: [v.item() if hasattr(v, "item") else v for v in group[name].tolist()]
                for name in schema.categorical_names
            },
            "num": {name: group[name].astype(float).tolist() for name in schema.numeric_names},
            "target": None,
        }
        if "target" in group.columns and pd.notna(group["target"].iloc[0]):
            record["target"] = float(group["target"].iloc[0])
        # first data row of this group; header is line 1
        line_no = int(group.index[0]) + 2
        sequences.append(_parse_record(record, schema, line_no))
        tags.append(group["split"].iloc[0] if "split" in group.columns else None)

    dataset = Dataset(schema=schema, sequences=sequences, split_tags=_collect_tags(tags), name=path.stem)
    logger.info(f"Imported {len(dataset)} sequences from event table {path}")
    return dataset


def _to_record(seq: EventSequence, tag: Optional[str]) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "id": seq.id,
        "t": list(seq.times),
        "cat": {k: list(v) for k, v in seq.cat_values.items()},
        "num": {k: list(v) for k, v in seq.num_values.items()},
        "target": seq.target,
    }
    if tag is not None:
        record["split"] = tag
    return record


def iter_records(dataset: Dataset) -> Iterable[Dict[str, Any]]:
    tags = dataset.split_tags or [None] * len(dataset)
    for seq, tag in zip(dataset.sequences, tags):
        yield _to_record(seq, tag)


def save_dataset(dataset: Dataset, path: Union[str, Path], write_schema: bool = True) -> Path:
    """
    Write JSON-lines (plus sidecar schema) atomically.

    Floats are written with ``repr`` precision, so load(save(d)) == d bit-exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            for record in iter_records(dataset):
                f.write(json.dumps(record, separators=(",", ":")))
                f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    if write_schema:
        save_schema(dataset.schema, schema_path_for(path))
    logger.info(f"Wrote {len(dataset)} sequences to {path}")
    return path
