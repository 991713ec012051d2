"""
Supervised training of encoder plus linear head, and fine-tuning of a
pre-trained encoder on a downstream target.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..core.checkpoint import ModelCheckpoint
from ..core.errors import ConfigError
from ..data.batching import iterate_batches, pad_batch
from ..data.dataset import Dataset
from ..evaluation.metrics import score_predictions
from ..models.schemas import EventSequence, FeatureSchema, TrainConfig
from .base import BaseTrainer


def task_loss(task: str, output: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
    """Cross-entropy for classification targets, squared error for regression."""
    if task == "regression":
        return F.mse_loss(output.squeeze(-1), targets.to(output.dtype))
    return F.cross_entropy(output, targets.long())


class SupervisedTrainer(BaseTrainer):
    """Encoder and head trained end to end on the sequence target."""

    method = "supervised"

    def __init__(
        self,
        schema: FeatureSchema,
        *args,
        init_encoder_state: Optional[Dict[str, torch.Tensor]] = None,
        **kwargs,
    ):
        super().__init__(schema, *args, **kwargs)
        self.init_encoder_state = init_encoder_state

    def build(self) -> nn.ModuleDict:
        modules = super().build()
        if self.init_encoder_state is not None:
            modules["encoder"].load_state_dict({k: v.to(self.dtype) for k, v in self.init_encoder_state.items()})
        return modules

    def check_dataset(self, dataset: Dataset):
        super().check_dataset(dataset)
        if self.schema.target_kind == "none":
            raise ValueError(f"{self.method} training requires a target; the schema declares none")
        missing = [s.id for s in dataset.sequences if s.target is None]
        if missing:
            raise ValueError(f"{len(missing)} training sequences have no target (first: {missing[0]!r})")

    def compute_loss(
        self, sequences: List[EventSequence], rng: np.random.Generator
    ) -> Tuple[torch.Tensor, Dict[str, float]]:
        batch = pad_batch(sequences)
        output = self.modules["head"](self.modules["encoder"](batch))
        loss = task_loss(self.schema.target_kind, output, batch.targets)
        return loss, {"task": float(loss.detach())}


class FinetuneTrainer(SupervisedTrainer):
    """Supervised training that starts from a pre-trained encoder; nothing is frozen."""

    method = "finetuned"


@torch.no_grad()
def predict(modules: nn.ModuleDict, dataset: Dataset, batch_size: int = 256) -> np.ndarray:
    """Head output per sequence: class probabilities, or the regression value."""
    modules.eval()
    outputs = []
    for chunk in iterate_batches(dataset.sequences, batch_size):
        output = modules["head"](modules["encoder"](pad_batch(chunk)))
        if dataset.schema.target_kind == "regression":
            outputs.append(output.squeeze(-1).double().numpy())
        else:
            outputs.append(torch.softmax(output, dim=-1).double().numpy())
    return np.concatenate(outputs, axis=0)


@dataclass
class FinetuneResult:
    checkpoint: ModelCheckpoint
    metric: str
    value: float


def finetune(
    checkpoint: ModelCheckpoint,
    train: Dataset,
    test: Dataset,
    train_config: Optional[TrainConfig] = None,
    seed: int = 0,
    task: Optional[str] = None,
) -> FinetuneResult:
    """
    Attach a fresh head to the pre-trained encoder, train everything on
    ``train`` and score on ``test``.

    Args:
        checkpoint: Any checkpoint with an ``encoder`` group
        train: Labelled training sequences
        test: Labelled evaluation sequences
        train_config: Optimisation settings
        seed: Seed for the head initialisation and batching
        task: Expected target kind; must agree with the dataset schema

    Returns:
        Fine-tuned checkpoint and its test metric
    """
    checkpoint.check_schema(train.schema)
    if task is not None and task != train.schema.target_kind:
        raise ConfigError(f"task '{task}' is incompatible with target kind '{train.schema.target_kind}'")
    trainer = FinetuneTrainer(
        train.schema,
        train_config or checkpoint.train_config,
        checkpoint.encoder_config,
        checkpoint.decoder_config,
        seed=seed,
        init_encoder_state=checkpoint.state["encoder"],
    )
    tuned = trainer.fit(train)
    tuned.extra["pretrained_method"] = checkpoint.method
    metric, value = score_predictions(test.schema.target_kind, test.targets(), predict(trainer.modules, test))
    trainer.logger.info(f"Fine-tuned {checkpoint.method} encoder: test {metric} = {value:.5f}")
    return FinetuneResult(tuned, metric, value)
