"""
Synthetic pendulum dataset: Hawkes-sampled observation times of damped
pendulums with random lengths; the target is the length.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..core.logger import get_logger
from ..data.dataset import Dataset
from ..models.schemas import EventSequence, FeatureSchema, HawkesParams, NumericFeature
from .hawkes import sample_hawkes
from .pendulum import DEFAULT_STEP, hermite_theta, integrate_many, to_coordinates


logger = get_logger(__name__)


class PendulumDatasetSettings(BaseModel):
    """Generation constants of the pendulum dataset."""

    hawkes: HawkesParams = Field(default_factory=HawkesParams)
    damping: float = 0.5
    mass: float = 1.0
    gravity: float = 9.81
    length_range: Tuple[float, float] = (0.5, 5.0)
    initial_range: Tuple[float, float] = (1.0, 9.0)
    step: float = DEFAULT_STEP
    chunk_size: int = Field(256, gt=0)

    @classmethod
    def from_config(cls, config, horizon: Optional[float] = None) -> "PendulumDatasetSettings":
        section = config.synthgen
        pendulum = section.get('pendulum') or {}
        hawkes = dict(section.get('hawkes') or {})
        hawkes['horizon'] = horizon if horizon is not None else section.get('horizon', 7.0)
        values = {
            'hawkes': HawkesParams(**hawkes),
            'step': section.get('integrator_step', DEFAULT_STEP),
        }
        for key in ('damping', 'mass', 'gravity', 'length_range', 'initial_range'):
            if key in pendulum:
                values[key] = pendulum[key]
        return cls(**values)


def pendulum_schema() -> FeatureSchema:
    """Two numeric coordinates, real-valued target."""
    return FeatureSchema(
        categorical=[],
        numeric=[NumericFeature(name="x"), NumericFeature(name="y")],
        time_unit="s",
        target_kind="regression",
    )


def sequence_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sequence ``index``; independent of generation order."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _generate_chunk(indices: List[int], seed: int, settings: PendulumDatasetSettings) -> List[EventSequence]:
    lengths, theta0, omega0, all_times = [], [], [], []
    for i in indices:
        rng = sequence_rng(seed, i)
        lengths.append(rng.uniform(*settings.length_range))
        theta0.append(rng.uniform(*settings.initial_range))
        omega0.append(rng.uniform(*settings.initial_range))
        times = sample_hawkes(settings.hawkes, rng)
        while not times:
            times = sample_hawkes(settings.hawkes, rng)
        all_times.append(np.asarray(times))

    lengths_arr = np.asarray(lengths)
    t_end = max(float(t[-1]) for t in all_times)
    grid, theta, omega = integrate_many(
        np.full(len(indices), settings.damping / settings.mass),
        settings.gravity / lengths_arr,
        np.asarray(theta0),
        np.asarray(omega0),
        t_end,
        settings.step,
    )

    sequences = []
    for col, i in enumerate(indices):
        times = all_times[col]
        x, y = to_coordinates(hermite_theta(grid, theta[:, col], omega[:, col], times))
        sequences.append(EventSequence.model_construct(
            id=f"pendulum-{i:06d}",
            times=times.tolist(),
            cat_values={},
            num_values={"x": x.tolist(), "y": y.tolist()},
            target=float(lengths_arr[col]),
        ))
    return sequences


def generate_pendulum_dataset(
    n_sequences: int,
    seed: int = 0,
    settings: Optional[PendulumDatasetSettings] = None,
    jobs: int = 1,
) -> Dataset:
    """
    Generate the pendulum dataset.

    Args:
        n_sequences: Number of sequences (>= 1)
        seed: Root seed; sequence i draws from the stream (seed, i)
        settings: Generation constants
        jobs: Worker processes for chunked generation

    Returns:
        Dataset with numeric features (x, y) and the length as target
    """
    if n_sequences < 1:
        raise ValueError(f"n_sequences must be >= 1, got {n_sequences}")
    settings = settings or PendulumDatasetSettings()

    chunks = [
        list(range(start, min(start + settings.chunk_size, n_sequences)))
        for start in range(0, n_sequences, settings.chunk_size)
    ]
    sequences: List[EventSequence] = []
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_generate_chunk, chunks, [seed] * len(chunks), [settings] * len(chunks)):
                sequences.extend(part)
    else:
        for done, chunk in enumerate(chunks, 1):
            sequences.extend(_generate_chunk(chunk, seed, settings))
            logger.debug(f"Progress: {done}/{len(chunks)} chunks")

    dataset = Dataset(schema=pendulum_schema(), sequences=sequences, name="pendulum")
    mean_len = float(dataset.lengths().mean())
    logger.info(f"Generated {n_sequences} pendulum sequences, mean length {mean_len:.1f}")
    return dataset
