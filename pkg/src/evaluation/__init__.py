"""Embedding evaluation: probes, geometry, robustness and reporting."""

from .embeddings import EmbeddingMatrix, extract_embeddings
from .metrics import score_predictions, metric_name
from .probes import ProbeResult, linear_probe, nonlinear_probe, tpp_probe, probe_split
from .geometry import anisotropy, intrinsic_dimension, geometry_correlation
from .perturb import perturb_shuffle, perturb_dropout
from .report import MetricsReport
from .robustness import robustness_report, pct_change, DROPOUT_GRID
from .generation import generate_from_embeddings, feature_distribution_distance

__all__ = [
    "EmbeddingMatrix",
    "extract_embeddings",
    "score_predictions",
    "metric_name",
    "ProbeResult",
    "linear_probe",
    "nonlinear_probe",
    "tpp_probe",
    "probe_split",
    "anisotropy",
    "intrinsic_dimension",
    "geometry_correlation",
    "perturb_shuffle",
    "perturb_dropout",
    "MetricsReport",
    "robustness_report",
    "pct_change",
    "DROPOUT_GRID",
    "generate_from_embeddings",
    "feature_distribution_distance",
]
