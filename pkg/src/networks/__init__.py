"""Neural building blocks."""

from .embedder import FeatureEmbedder
from .encoder import GRUEncoder
from .heads import Projector, LinearHead, AlignmentScalars
from .decoder import EventDecoder, DecoderOutput
from .optim import build_optimizer, adamw_step, clip_gradients, trainable_parameters
from .assembly import build_model, head_dim_for, GROUPS_BY_METHOD

__all__ = [
    "FeatureEmbedder",
    "GRUEncoder",
    "Projector",
    "LinearHead",
    "AlignmentScalars",
    "EventDecoder",
    "DecoderOutput",
    "build_optimizer",
    "adamw_step",
    "clip_gradients",
    "trainable_parameters",
    "build_model",
    "head_dim_for",
    "GROUPS_BY_METHOD",
]
