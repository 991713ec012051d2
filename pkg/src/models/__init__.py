"""Models package initialization."""

from .schemas import (
    CategoricalFeature,
    NumericFeature,
    FeatureSchema,
    EventSequence,
    HawkesParams,
    PendulumParams,
    EncoderConfig,
    DecoderConfig,
    TrainConfig,
    RunConfig,
    MetricRecord,
    RobustnessRow,
    RobustnessSample,
)

__all__ = [
    "CategoricalFeature",
    "NumericFeature",
    "FeatureSchema",
    "EventSequence",
    "HawkesParams",
    "PendulumParams",
    "EncoderConfig",
    "DecoderConfig",
    "TrainConfig",
    "RunConfig",
    "MetricRecord",
    "RobustnessRow",
    "RobustnessSample",
]
