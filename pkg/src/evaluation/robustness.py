"""
Robustness of frozen embeddings to event shuffling and event dropout.
"""

from typing import Iterable, Optional, Sequence

import numpy as np

from ..core.checkpoint import ModelCheckpoint
from ..core.logger import get_logger
from ..data.dataset import Dataset
from ..models.schemas import RobustnessSample
from .embeddings import extract_embeddings
from .metrics import LOWER_IS_BETTER
from .perturb import perturb_dropout, perturb_shuffle
from .probes import linear_probe
from .report import MetricsReport


logger = get_logger(__name__)

DROPOUT_GRID = (0.1, 0.3, 0.5, 0.7)


def pct_change(metric: str, baseline: float, value: float) -> float:
    """Relative change in percent, signed so that a degradation is negative."""
    if baseline == 0.0:
        return 0.0 if value == 0.0 else float("-inf") if metric in LOWER_IS_BETTER else float("inf")
    change = 100.0 * (value - baseline) / abs(baseline)
    return -change if metric in LOWER_IS_BETTER else change


def robustness_report(
    checkpoint: ModelCheckpoint,
    dataset: Dataset,
    grid: Sequence[float] = DROPOUT_GRID,
    seeds: Iterable[int] = (0, 1, 2),
    task: Optional[str] = None,
    shuffle: bool = True,
    regularization: float = 1e-3,
    test_fraction: float = 0.2,
    batch_size: int = 256,
) -> MetricsReport:
    """
    Linear-probe the checkpoint's embeddings of perturbed copies of ``dataset``
    and compare against the unperturbed probe.

    Args:
        checkpoint: Trained model
        dataset: Labelled sequences; split tags decide the probe's held-out rows
        grid: Dropout probabilities
        seeds: Perturbation seeds; each gives one sample per level
        task: Probe task, defaults to the schema's target kind
        shuffle: Also evaluate event shuffling
        regularization: Linear probe strength

    Returns:
        Report holding one sample per (perturbation, level, seed); the
        unperturbed level is 0% by construction
    """
    task = task or dataset.schema.target_kind
    seeds = list(seeds)

    def probe(data: Dataset):
        return linear_probe(extract_embeddings(checkpoint, data, batch_size), task,
                            regularization, test_fraction, seed=checkpoint.seed)

    metric, baseline = probe(dataset)
    report = MetricsReport()

    def record(perturbation: str, p: float, perturb_seed: int, value: float):
        report.samples.append(RobustnessSample(
            method=checkpoint.method, dataset=dataset.name, perturbation=perturbation, p=p,
            metric=metric, seed=checkpoint.seed, perturb_seed=perturb_seed,
            baseline=baseline, value=value, pct_change=pct_change(metric, baseline, value),
        ))

    for perturb_seed in seeds:
        record("none", 0.0, perturb_seed, baseline)
        if shuffle:
            rng = np.random.default_rng([perturb_seed, 0])
            record("shuffle", 0.0, perturb_seed, probe(perturb_shuffle(dataset, rng)).value)
        for i, p in enumerate(grid, start=1):
            rng = np.random.default_rng([perturb_seed, i])
            record("dropout", float(p), perturb_seed, probe(perturb_dropout(dataset, p, rng)).value)

    for row in report.robustness_rows():
        logger.info(f"{row.method} {row.perturbation} p={row.p:g}: {row.mean_pct:+.1f}% ± {row.std_pct:.1f}")
    return report
