"""
Probing: fit a fixed, cheap model on frozen embeddings and score it on held-out rows.
"""

from typing import NamedTuple, Optional, Tuple

import numpy as np
from sklearn.ensemble import (
    HistGradientBoostingClassifier,
    HistGradientBoostingRegressor,
)
from sklearn.linear_model import LogisticRegression, Ridge
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from ..core.checkpoint import ModelCheckpoint
from ..core.logger import get_logger
from ..data.dataset import Dataset
from .embeddings import EmbeddingMatrix, extract_embeddings
from .metrics import score_predictions


logger = get_logger(__name__)

TASKS = ("regression", "binary", "multiclass")


class ProbeResult(NamedTuple):
    metric: str
    value: float


def probe_split(emb: EmbeddingMatrix, test_fraction: float = 0.2, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fitting and scoring row indices among rows with a target.

    Rows tagged ``test`` are scored and all others fitted when the matrix
    carries split tags with a test part; otherwise a seeded random
    ``test_fraction`` of rows is held out.
    """
    labelled = np.flatnonzero(~np.isnan(emb.targets))
    if labelled.size < 2:
        raise ValueError("probing needs at least two sequences with a target")
    tags = np.asarray(emb.split_tags) if emb.split_tags is not None else None
    if tags is not None and (tags[labelled] == "test").any() and (tags[labelled] != "test").any():
        test = labelled[tags[labelled] == "test"]
        train = labelled[tags[labelled] != "test"]
    else:
        if not 0 < test_fraction < 1:
            raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
        order = np.random.default_rng(seed).permutation(labelled)
        n_test = min(max(1, int(round(test_fraction * order.size))), order.size - 1)
        test, train = np.sort(order[:n_test]), np.sort(order[n_test:])
    assert np.intersect1d(train, test).size == 0, "probe fitting rows overlap scoring rows"
    return train, test


def _check_task(task: str, y_train: np.ndarray):
    if task not in TASKS:
        raise ValueError(f"unknown probe task '{task}'; choose from {TASKS}")
    if task != "regression" and np.unique(y_train).size < 2:
        raise ValueError("classification probe has a single class in its training targets")


def _fit_and_score(model, emb: EmbeddingMatrix, task: str, test_fraction: float, seed: int) -> ProbeResult:
    train, test = probe_split(emb, test_fraction, seed)
    x, y = emb.values, emb.targets
    y_train = y[train] if task == "regression" else y[train].astype(np.int64)
    _check_task(task, y_train)
    model.fit(x[train], y_train)
    if task == "regression":
        output = model.predict(x[test])
    else:
        # place probabilities by class code so column 1 is the positive class
        proba = model.predict_proba(x[test])
        classes = model.classes_.astype(np.int64)
        output = np.zeros((len(test), int(max(classes.max(), y[test].max())) + 1))
        output[:, classes] = proba
    return ProbeResult(*score_predictions(task, y[test], output))


def linear_probe(
    emb: EmbeddingMatrix,
    task: str,
    regularization: float = 1e-3,
    test_fraction: float = 0.2,
    seed: int = 0,
) -> ProbeResult:
    """
    Ridge regression or L2 logistic regression on standardised embeddings.

    Args:
        emb: Embeddings with targets
        task: ``regression``, ``binary`` or ``multiclass``
        regularization: Ridge alpha; the logistic inverse strength is its reciprocal
        test_fraction: Held-out share when the rows carry no test tags
        seed: Seed of the random hold-out

    Returns:
        MSE, ROC-AUC or accuracy on the held-out rows
    """
    if task == "regression":
        estimator = Ridge(alpha=regularization)
    else:
        estimator = LogisticRegression(C=1.0 / regularization, max_iter=2000)
    return _fit_and_score(make_pipeline(StandardScaler(), estimator), emb, task, test_fraction, seed)


def nonlinear_probe(
    emb: EmbeddingMatrix,
    task: str,
    max_depth: int = 6,
    n_iterations: int = 200,
    learning_rate: float = 0.1,
    test_fraction: float = 0.2,
    seed: int = 0,
) -> ProbeResult:
    """Gradient-boosted trees on the embeddings; same split and metric conventions as the linear probe."""
    params = dict(max_depth=max_depth, max_iter=n_iterations, learning_rate=learning_rate,
                  early_stopping=False, random_state=seed)
    if task == "regression":
        model = HistGradientBoostingRegressor(**params)
    else:
        model = HistGradientBoostingClassifier(**params)
    return _fit_and_score(model, emb, task, test_fraction, seed)


def tpp_probe(
    checkpoint: ModelCheckpoint,
    dataset: Dataset,
    regularization: float = 1e-3,
    test_fraction: float = 0.2,
    seed: int = 0,
    batch_size: int = 256,
    feature: Optional[str] = None,
) -> ProbeResult:
    """
    Next-event probe: embed each sequence without its last event and
    linearly predict that event.

    The target is the code of ``feature`` (default: the first categorical
    feature), scored by accuracy; without categorical features it is the
    time to the last event, scored by MSE.

    Raises:
        ValueError: when every sequence has a single event
    """
    usable = [s for s in dataset.sequences if len(s) >= 2]
    if not usable:
        raise ValueError("next-event probing needs sequences with at least two events")
    if feature is None and dataset.schema.categorical:
        feature = dataset.schema.categorical[0].name

    prefixes = []
    for seq in usable:
        n = len(seq)
        if feature is not None:
            target = float(seq.cat_values[feature][-1])
        else:
            target = float(seq.times[-1] - seq.times[-2])
        prefixes.append(seq.select(list(range(n - 1)), target=target))
    tags = None
    if dataset.split_tags is not None:
        tag_of = dict(zip((s.id for s in dataset.sequences), dataset.split_tags))
        tags = [tag_of[s.id] for s in usable]
    emb = extract_embeddings(checkpoint, dataset.with_sequences(prefixes, tags), batch_size)

    if feature is None:
        return linear_probe(emb, "regression", regularization, test_fraction, seed)
    codes = np.unique(emb.targets)
    if codes.size == 1:
        logger.info(f"Next-event probe: '{feature}' takes a single value, constant prediction is exact")
        return ProbeResult("accuracy", 1.0)
    return linear_probe(emb, "multiclass", regularization, test_fraction, seed)
