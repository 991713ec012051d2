"""
Training strategies and the dispatcher used by the pipeline.
"""

from typing import Dict, Optional, Type

import torch

from ..core.checkpoint import ModelCheckpoint
from ..core.logger import get_logger
from ..data.dataset import Dataset
from ..models.schemas import DecoderConfig, EncoderConfig, FeatureSchema, TrainConfig
from ..networks.assembly import build_model
from ..utils.seeding import seed_everything
from .base import BaseTrainer
from .contrastive import ContrastiveTrainer
from .generative import GenerativeTrainer
from .mlem import MLEMTrainer
from .naive import NaiveHybridTrainer
from .supervised import FinetuneResult, FinetuneTrainer, SupervisedTrainer, finetune, predict

logger = get_logger(__name__)

TRAINERS: Dict[str, Type[BaseTrainer]] = {
    "supervised": SupervisedTrainer,
    "contrastive": ContrastiveTrainer,
    "generative": GenerativeTrainer,
    "naive": NaiveHybridTrainer,
    "mlem": MLEMTrainer,
}


def random_checkpoint(
    schema: FeatureSchema,
    encoder_config: Optional[EncoderConfig] = None,
    seed: int = 0,
    train_config: Optional[TrainConfig] = None,
) -> ModelCheckpoint:
    """Untrained encoder, used as the lower baseline for every probe."""
    encoder_config = encoder_config or EncoderConfig()
    train_config = train_config or TrainConfig()
    seed_everything(seed)
    modules = build_model("random", schema, encoder_config)
    return ModelCheckpoint.from_modules("random", modules, schema, encoder_config, DecoderConfig(), train_config, seed)


def train_method(
    method: str,
    train: Dataset,
    val: Optional[Dataset] = None,
    train_config: Optional[TrainConfig] = None,
    encoder_config: Optional[EncoderConfig] = None,
    decoder_config: Optional[DecoderConfig] = None,
    seed: int = 0,
    contrastive_checkpoint: Optional[ModelCheckpoint] = None,
    dtype: torch.dtype = torch.float32,
) -> ModelCheckpoint:
    """
    Train one method on ``train``.

    Args:
        method: ``random``, ``supervised``, ``contrastive``, ``generative``, ``naive`` or ``mlem``
        train: Training split
        val: Optional validation split (monitoring only)
        train_config: Optimisation settings
        encoder_config: Encoder sizes
        decoder_config: Decoder sizes
        seed: Run seed
        contrastive_checkpoint: Frozen contrastive model, required by ``mlem``
        dtype: Parameter dtype

    Returns:
        Trained checkpoint
    """
    if method == "random":
        return random_checkpoint(train.schema, encoder_config, seed, train_config)
    if method not in TRAINERS:
        raise ValueError(f"unknown method '{method}'; choose from {['random', *TRAINERS]}")
    kwargs = dict(train_config=train_config, encoder_config=encoder_config, decoder_config=decoder_config,
                  seed=seed, dtype=dtype)
    if method == "mlem":
        if contrastive_checkpoint is None:
            raise ValueError("mlem training requires a trained contrastive checkpoint")
        trainer = MLEMTrainer(train.schema, contrastive_checkpoint, **kwargs)
    else:
        trainer = TRAINERS[method](train.schema, **kwargs)
    return trainer.fit(train, val)


__all__ = [
    "BaseTrainer",
    "ContrastiveTrainer",
    "FinetuneResult",
    "FinetuneTrainer",
    "GenerativeTrainer",
    "MLEMTrainer",
    "NaiveHybridTrainer",
    "SupervisedTrainer",
    "TRAINERS",
    "finetune",
    "predict",
    "random_checkpoint",
    "train_method",
]
