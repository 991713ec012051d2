"""
Base trainer class with the shared optimisation loop.
"""

from abc import ABC, abstractmethod
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch
from torch import nn

from ..core.checkpoint import ModelCheckpoint
from ..core.logger import get_logger
from ..data.batching import iterate_batches
from ..data.dataset import Dataset
from ..models.schemas import DecoderConfig, EncoderConfig, EventSequence, FeatureSchema, TrainConfig
from ..networks.assembly import build_model
from ..networks.optim import adamw_step, build_optimizer, trainable_parameters
from ..utils.seeding import deterministic_mode, seed_everything


class BaseTrainer(ABC):
    """
    Abstract base class for all training strategies.
    Subclasses define the parameter groups (``method``) and the loss of one batch.
    """

    method: str = ""

    def __init__(
        self,
        schema: FeatureSchema,
        train_config: Optional[TrainConfig] = None,
        encoder_config: Optional[EncoderConfig] = None,
        decoder_config: Optional[DecoderConfig] = None,
        seed: int = 0,
        dtype: torch.dtype = torch.float32,
    ):
        """
        Initialize base trainer.

        Args:
            schema: Feature schema of the training data
            train_config: Optimisation settings
            encoder_config: Encoder sizes
            decoder_config: Decoder sizes (generative objectives only)
            seed: Seed for initialisation, batching and view sampling
            dtype: Parameter dtype
        """
        self.logger = get_logger(self.__class__.__name__)
        self.schema = schema
        self.config = train_config or TrainConfig()
        self.encoder_config = encoder_config or EncoderConfig()
        self.decoder_config = decoder_config or DecoderConfig()
        self.seed = seed
        self.dtype = dtype
        self.modules: Optional[nn.ModuleDict] = None
        self.step = 0
        self.history: Dict[str, List[float]] = defaultdict(list)

    def build(self) -> nn.ModuleDict:
        """Instantiate the parameter groups; subclasses may load or freeze groups."""
        return build_model(self.method, self.schema, self.encoder_config, self.decoder_config).to(self.dtype)

    def frozen_groups(self) -> Tuple[str, ...]:
        """Groups kept in eval mode and excluded from the optimizer."""
        return ()

    @abstractmethod
    def compute_loss(
        self, sequences: List[EventSequence], rng: np.random.Generator
    ) -> Tuple[torch.Tensor, Dict[str, float]]:
        """
        Loss of one batch of sequences.

        Returns:
            (scalar loss to minimise, named scalar components for the history)
        """

    def check_dataset(self, dataset: Dataset):
        if len(dataset) == 0:
            raise ValueError(f"{self.method}: empty training set")

    def fit(self, train: Dataset, val: Optional[Dataset] = None) -> ModelCheckpoint:
        """
        Train for the configured number of epochs.

        Args:
            train: Training sequences
            val: Optional validation set, monitored only

        Returns:
            Checkpoint with the loss history
        """
        self.check_dataset(train)
        with deterministic_mode(self.config.deterministic):
            return self._fit(train, val)

    def _fit(self, train: Dataset, val: Optional[Dataset]) -> ModelCheckpoint:
        rng = seed_everything(self.seed)
        self.modules = self.build()
        params = trainable_parameters(self.modules)
        optimizer = build_optimizer(params, self.config)
        epochs = self.config.resolve_epochs(len(train))
        self.logger.info(
            f"Training {self.method} on {len(train)} sequences for {epochs} epochs "
            f"(seed={self.seed}, {sum(p.numel() for p in params)} trainable parameters)"
        )

        for epoch in range(1, epochs + 1):
            self._set_mode(training=True)
            sums: Dict[str, float] = defaultdict(float)
            n_batches = 0
            for chunk in iterate_batches(train.sequences, self.config.batch_size, rng):
                optimizer.zero_grad(set_to_none=True)
                loss, parts = self.compute_loss(chunk, rng)
                loss.backward()
                adamw_step(optimizer, max_norm=self.config.grad_clip)
                self.step += 1
                self.history["loss"].append(float(loss.detach()))
                for name, value in parts.items():
                    self.history[name].append(value)
                    sums[name] += value
                sums["loss"] += float(loss.detach())
                n_batches += 1

            for name, total in sums.items():
                self.history[f"epoch/{name}"].append(total / n_batches)
            message = f"epoch {epoch}: loss {sums['loss'] / n_batches:.5f}"
            if val is not None and len(val) > 0:
                val_loss = self.evaluate_loss(val)
                self.history["epoch/val_loss"].append(val_loss)
                message += f", val {val_loss:.5f}"
            self.logger.info(message)
            self.log_progress(epoch, epochs, "epochs")

        return self.to_checkpoint()

    @torch.no_grad()
    def evaluate_loss(self, dataset: Dataset) -> float:
        """Mean batch loss without updates, with a fixed view-sampling stream."""
        self._set_mode(training=False)
        rng = np.random.default_rng(self.seed)
        losses = [
            float(self.compute_loss(chunk, rng)[0])
            for chunk in iterate_batches(dataset.sequences, self.config.batch_size)
        ]
        self._set_mode(training=True)
        return float(np.mean(losses))

    def _set_mode(self, training: bool):
        self.modules.train(training)
        for group in self.frozen_groups():
            self.modules[group].eval()

    def to_checkpoint(self) -> ModelCheckpoint:
        return ModelCheckpoint.from_modules(
            self.method, self.modules, self.schema, self.encoder_config, self.decoder_config,
            self.config, self.seed, self.step, dict(self.history),
        )

    def log_progress(self, current: int, total: int, item: str = "items"):
        """
        Log progress.

        Args:
            current: Current count
            total: Total count
            item: Item name for logging
        """
        if total > 0:
            percent = (current / total) * 100
            self.logger.info(f"Progress: {current}/{total} {item} ({percent:.1f}%)")
        else:
            self.logger.info(f"Processed: {current} {item}")
