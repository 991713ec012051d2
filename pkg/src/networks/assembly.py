"""
Named parameter groups for each training strategy.

Every model is an ``nn.ModuleDict`` whose keys are the checkpoint groups:

    encoder              GRUEncoder whose output is the exported embedding
    projector            contrastive projector (contrastive, naive)
    decoder              EventDecoder sharing the encoder's embedder (generative, naive, mlem)
    contrastive_encoder  frozen GRUEncoder (mlem)
    align                learnable temperature and bias (mlem)
    head                 linear head (supervised, finetuned)
"""

from typing import Optional

from torch import nn

from ..models.schemas import DecoderConfig, EncoderConfig, FeatureSchema
from .decoder import EventDecoder
from .encoder import GRUEncoder
from .heads import AlignmentScalars, LinearHead, Projector


GROUPS_BY_METHOD = {
    "random": ("encoder",),
    "supervised": ("encoder", "head"),
    "contrastive": ("encoder", "projector"),
    "generative": ("encoder", "decoder"),
    "naive": ("encoder", "projector", "decoder"),
    "mlem": ("encoder", "decoder", "contrastive_encoder", "align"),
    "finetuned": ("encoder", "head"),
}


def head_dim_for(schema: FeatureSchema) -> int:
    """Output width of a supervised head: classes for classification, 1 for regression."""
    if schema.target_kind in ("binary", "multiclass"):
        return int(schema.n_classes)
    if schema.target_kind == "regression":
        return 1
    raise ValueError("dataset has no target (target_kind='none')")


def build_model(
    method: str,
    schema: FeatureSchema,
    encoder_config: EncoderConfig,
    decoder_config: Optional[DecoderConfig] = None,
    head_dim: Optional[int] = None,
) -> nn.ModuleDict:
    """Instantiate the parameter groups of ``method``."""
    if method not in GROUPS_BY_METHOD:
        raise ValueError(f"unknown method '{method}'")
    groups = GROUPS_BY_METHOD[method]
    decoder_config = decoder_config or DecoderConfig()
    hidden = encoder_config.hidden_size

    modules = nn.ModuleDict()
    modules["encoder"] = GRUEncoder(schema, encoder_config)
    if "projector" in groups:
        modules["projector"] = Projector(hidden, encoder_config.projector_dim, hidden)
    if "decoder" in groups:
        modules["decoder"] = EventDecoder(schema, modules["encoder"].embedder, hidden, decoder_config)
    if "contrastive_encoder" in groups:
        frozen = GRUEncoder(schema, encoder_config)
        frozen.requires_grad_(False)
        modules["contrastive_encoder"] = frozen
    if "align" in groups:
        modules["align"] = AlignmentScalars()
    if "head" in groups:
        modules["head"] = LinearHead(hidden, head_dim if head_dim is not None else head_dim_for(schema))
    return modules
