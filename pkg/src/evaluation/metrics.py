"""
Downstream metric conventions shared by probes and fine-tuning.

    regression   mean squared error (lower is better)
    binary       ROC-AUC of the positive-class score
    multiclass   accuracy
"""

from typing import Tuple

import numpy as np
from sklearn.metrics import accuracy_score, mean_squared_error, roc_auc_score

LOWER_IS_BETTER = {"mse"}


def metric_name(task: str) -> str:
    return {"regression": "mse", "binary": "roc_auc", "multiclass": "accuracy"}[task]


def score_predictions(task: str, y_true: np.ndarray, output: np.ndarray) -> Tuple[str, float]:
    """
    Score model output against targets.

    Args:
        task: ``regression``, ``binary`` or ``multiclass``
        y_true: N targets
        output: N predictions (regression) or N x k class probabilities

    Returns:
        (metric name, value)
    """
    y_true = np.asarray(y_true)
    output = np.asarray(output)
    if task == "regression":
        return "mse", float(mean_squared_error(y_true, output.reshape(-1)))
    labels = y_true.astype(np.int64)
    if task == "binary":
        if len(np.unique(labels)) < 2:
            raise ValueError("ROC-AUC needs both classes in the evaluation targets")
        positive = output[:, 1] if output.ndim == 2 else output
        return "roc_auc", float(roc_auc_score(labels, positive))
    if task == "multiclass":
        return "accuracy", float(accuracy_score(labels, output.argmax(axis=1)))
    raise ValueError(f"unknown task '{task}'")
