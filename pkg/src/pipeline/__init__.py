"""Run orchestration: run directories and pipeline stages."""

from .rundir import RunDirectory
from .stages import (
    build_run_config,
    evaluate_checkpoint,
    prepare_run_data,
    preprocess_dataset,
    pretrain_seed,
    run_pipeline,
    run_seed,
    stage,
)

__all__ = [
    "RunDirectory",
    "build_run_config",
    "evaluate_checkpoint",
    "prepare_run_data",
    "preprocess_dataset",
    "pretrain_seed",
    "run_pipeline",
    "run_seed",
    "stage",
]
