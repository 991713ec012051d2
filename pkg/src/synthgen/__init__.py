"""Synthetic data generation package."""

from .hawkes import hawkes_intensity, sample_hawkes
from .pendulum import simulate_pendulum, integrate_pendulum, pendulum_energy
from .generator import generate_pendulum_dataset, pendulum_schema, PendulumDatasetSettings

__all__ = [
    "hawkes_intensity",
    "sample_hawkes",
    "simulate_pendulum",
    "integrate_pendulum",
    "pendulum_energy",
    "generate_pendulum_dataset",
    "pendulum_schema",
    "PendulumDatasetSettings",
]
