"""
Geometry of embedding spaces: anisotropy and intrinsic dimension, and how
they relate to downstream quality.
"""

from typing import Dict, Iterable, Mapping, Union

import numpy as np
import pandas as pd
from sklearn.neighbors import NearestNeighbors

from ..core.logger import get_logger
from .embeddings import EmbeddingMatrix
from .metrics import LOWER_IS_BETTER


logger = get_logger(__name__)

MIN_ID_POINTS = 10


def _as_array(emb: Union[EmbeddingMatrix, np.ndarray]) -> np.ndarray:
    values = emb.values if isinstance(emb, EmbeddingMatrix) else np.asarray(emb, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"expected an N x m matrix, got shape {values.shape}")
    return values


def anisotropy(emb: Union[EmbeddingMatrix, np.ndarray], center: bool = True) -> float:
    """
    Share of the largest squared singular value, sigma_1^2 / sum sigma_i^2.

    1 means all rows lie on one line; 1/d is perfectly isotropic in d dimensions.

    Args:
        emb: N x m embeddings, N >= 2
        center: Subtract the column means first
    """
    x = _as_array(emb)
    if x.shape[0] < 2:
        raise ValueError("anisotropy needs at least two embeddings")
    if center:
        x = x - x.mean(axis=0, keepdims=True)
    s = np.linalg.svd(x, compute_uv=False)
    total = float(np.sum(s ** 2))
    if total <= 0.0:
        raise ValueError("embedding matrix is zero after centering")
    return float(s[0] ** 2 / total)


def intrinsic_dimension(emb: Union[EmbeddingMatrix, np.ndarray]) -> float:
    """
    Two-nearest-neighbour estimate of the intrinsic dimension.

    For each point mu = r2 / r1 is the ratio of its second to first neighbour
    distance; the maximum-likelihood dimension is N / sum(log mu).
    Exact duplicate rows are dropped first.
    """
    x = np.unique(_as_array(emb), axis=0)
    n = x.shape[0]
    if n < MIN_ID_POINTS:
        raise ValueError(f"intrinsic dimension needs at least {MIN_ID_POINTS} distinct points, got {n}")
    distances, _ = NearestNeighbors(n_neighbors=3).fit(x).kneighbors(x)
    r1, r2 = distances[:, 1], distances[:, 2]
    log_mu = np.log(r2[r1 > 0] / r1[r1 > 0])
    total = float(log_mu.sum())
    if total <= 0.0:
        raise ValueError("degenerate neighbour distances; intrinsic dimension is undefined")
    return float(log_mu.size / total)


def geometry_correlation(records: Union[pd.DataFrame, Iterable[Mapping]]) -> Dict[str, Dict[str, float]]:
    """
    Correlation between embedding geometry and probe quality across cells.

    Args:
        records: Rows with ``dataset``, ``metric``, ``value``, ``anisotropy``
            and ``intrinsic_dimension`` (one per method/dataset cell)

    Returns:
        ``{"anisotropy": {"pearson": r, "spearman": rho}, "intrinsic_dimension": {...}}``;
        the probe value is min-max normalised within each dataset and
        oriented so that higher is better.
    """
    frame = pd.DataFrame(list(records) if not isinstance(records, pd.DataFrame) else records).copy()
    required = {"dataset", "metric", "value", "anisotropy", "intrinsic_dimension"}
    missing = required - set(frame.columns)
    if missing:
        raise ValueError(f"missing columns {sorted(missing)}")

    oriented = np.where(frame["metric"].isin(LOWER_IS_BETTER), -frame["value"], frame["value"])
    frame["quality"] = oriented
    grouped = frame.groupby("dataset")["quality"]
    spread = (grouped.transform("max") - grouped.transform("min")).replace(0.0, np.nan)
    frame["quality"] = ((frame["quality"] - grouped.transform("min")) / spread).fillna(0.5)

    result = {}
    for column in ("anisotropy", "intrinsic_dimension"):
        result[column] = {
            method: float(frame[column].corr(frame["quality"], method=method))
            for method in ("pearson", "spearman")
        }
    logger.info(f"Geometry correlation over {len(frame)} cells: {result}")
    return result
