"""
Sequence embeddings of a trained encoder and their export formats.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import torch

from ..core.checkpoint import ModelCheckpoint
from ..core.csv_exporter import CSVExporter
from ..core.logger import get_logger
from ..data.batching import iterate_batches, pad_batch
from ..data.dataset import Dataset


logger = get_logger(__name__)


@dataclass
class EmbeddingMatrix:
    """N sequence embeddings with their ids, targets and split tags."""

    ids: List[str]
    values: np.ndarray                    # N x m float64
    targets: np.ndarray                   # N float64, NaN where absent
    split_tags: Optional[List[str]] = None
    method: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != len(self.ids):
            raise ValueError(f"embedding matrix shape {self.values.shape} does not match {len(self.ids)} ids")
        if not np.isfinite(self.values).all():
            raise ValueError("embedding matrix contains non-finite entries")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def save(self, directory: Union[str, Path], stem: str, config_hash: str = "") -> Path:
        """
        Write ``<stem>.csv`` (id, target, h_0 ... h_{m-1}), ``<stem>.f32``
        (row-major little-endian float32) and ``<stem>.json`` describing the binary.

        Returns:
            Path of the binary file
        """
        directory = Path(directory)
        exporter = CSVExporter(output_dir=str(directory))
        exporter.export_matrix(self.ids, self.targets.tolist(), self.values, f"{stem}.csv")
        binary = directory / f"{stem}.f32"
        binary.write_bytes(self.values.astype("<f4").tobytes())
        sidecar = {
            "dtype": "float32",
            "byte_order": "little",
            "shape": list(self.values.shape),
            "ids": self.ids,
            "targets": [None if np.isnan(t) else float(t) for t in self.targets],
            "split_tags": self.split_tags,
            "method": self.method,
            "seed": self.seed,
            "config_hash": config_hash,
        }
        (directory / f"{stem}.json").write_text(json.dumps(sidecar), encoding="utf-8")
        return binary

    @classmethod
    def load(cls, binary: Union[str, Path]) -> "EmbeddingMatrix":
        """Read a matrix written by :meth:`save` from its binary and sidecar."""
        binary = Path(binary)
        meta = json.loads(binary.with_suffix(".json").read_text(encoding="utf-8"))
        values = np.fromfile(binary, dtype="<f4").reshape(meta["shape"]).astype(np.float64)
        targets = np.array([np.nan if t is None else t for t in meta["targets"]], dtype=np.float64)
        return cls(meta["ids"], values, targets, meta.get("split_tags"), meta.get("method", ""), meta.get("seed", 0))


@torch.no_grad()
def extract_embeddings(
    checkpoint: ModelCheckpoint,
    dataset: Dataset,
    batch_size: int = 256,
    dtype: torch.dtype = torch.float32,
) -> EmbeddingMatrix:
    """
    Encode every sequence of ``dataset`` with the checkpoint's ``encoder`` group.

    This is the pre-projector state for contrastive models and the generative
    encoder for MLEM. Rows follow the dataset order.

    Raises:
        SchemaMismatchError: when the dataset schema differs from the checkpoint's
    """
    checkpoint.check_schema(dataset.schema)
    if len(dataset) == 0:
        raise ValueError("cannot embed an empty dataset")
    encoder = checkpoint.build(dtype)["encoder"]
    encoder.eval()
    chunks = [
        encoder(pad_batch(chunk)).double().numpy()
        for chunk in iterate_batches(dataset.sequences, batch_size)
    ]
    values = np.concatenate(chunks, axis=0)
    logger.debug(f"Embedded {values.shape[0]} sequences with the {checkpoint.method} encoder (dim {values.shape[1]})")
    return EmbeddingMatrix(
        ids=[s.id for s in dataset.sequences],
        values=values,
        targets=dataset.targets(),
        split_tags=list(dataset.split_tags) if dataset.split_tags is not None else None,
        method=checkpoint.method,
        seed=checkpoint.seed,
    )
