"""
Shared fixtures: tiny schemas, datasets and model sizes that train in seconds.
"""

from typing import List, Optional

import numpy as np
import pytest

from src.core.config import reset_config
from src.core.logger import WorkbenchLogger
from src.data.dataset import Dataset
from src.models.schemas import (
    CategoricalFeature,
    DecoderConfig,
    EncoderConfig,
    EventSequence,
    FeatureSchema,
    NumericFeature,
    TrainConfig,
)


@pytest.fixture(autouse=True)
def quiet_logging():
    """Route workbench logs nowhere and drop global state after each test."""
    WorkbenchLogger.configure(log_file=None, level="WARNING", console_output=False)
    yield
    WorkbenchLogger.reset()
    reset_config()


def make_sequence(
    rng: np.random.Generator,
    seq_id: str,
    n: int,
    schema: FeatureSchema,
    target: Optional[float] = None,
) -> EventSequence:
    times = np.cumsum(rng.exponential(1.0, size=n)).tolist()
    cat = {f.name: rng.integers(2, f.vocab_size, size=n).tolist() for f in schema.categorical}
    num = {f.name: rng.normal(size=n).tolist() for f in schema.numeric}
    return EventSequence(id=seq_id, times=times, cat_values=cat, num_values=num, target=target)


def make_dataset(schema: FeatureSchema, n_sequences: int = 24, seed: int = 0, min_len: int = 3,
                 max_len: int = 12, name: str = "toy") -> Dataset:
    rng = np.random.default_rng(seed)
    sequences: List[EventSequence] = []
    for i in range(n_sequences):
        n = int(rng.integers(min_len, max_len + 1))
        target = float(i % 2) if schema.target_kind != "none" else None
        sequences.append(make_sequence(rng, f"seq-{i:03d}", n, schema, target))
    return Dataset(schema=schema, sequences=sequences, name=name)


@pytest.fixture
def mixed_schema() -> FeatureSchema:
    return FeatureSchema(
        categorical=[CategoricalFeature(name="mcc", vocab_size=6, embed_dim=4)],
        numeric=[NumericFeature(name="amount")],
        target_kind="binary",
    )


@pytest.fixture
def numeric_schema() -> FeatureSchema:
    return FeatureSchema(numeric=[NumericFeature(name="x"), NumericFeature(name="y")], target_kind="regression")


@pytest.fixture
def tiny_dataset(mixed_schema) -> Dataset:
    return make_dataset(mixed_schema)


@pytest.fixture
def small_encoder() -> EncoderConfig:
    return EncoderConfig(hidden_size=8, feature_embed_dim=4, projector_dim=6)


@pytest.fixture
def small_decoder() -> DecoderConfig:
    return DecoderConfig(layers=1, heads=2, model_dim=8, ff_dim=16)


@pytest.fixture
def fast_train() -> TrainConfig:
    return TrainConfig(epochs=2, batch_size=8, seeds=[0], deterministic=True)
