"""
Univariate Hawkes process with exponential kernel.

    lambda(t) = mu + sum_{t_i < t} alpha * exp(-beta * (t - t_i))
"""

from typing import List, Sequence

import numpy as np

from ..core.errors import ConfigError
from ..models.schemas import HawkesParams


def hawkes_intensity(params: HawkesParams, history: Sequence[float], t: float) -> float:
    """
    Conditional intensity at ``t`` given earlier event times.

    Args:
        params: Process parameters
        history: Ascending event times, all earlier than ``t``
        t: Evaluation time

    Returns:
        lambda(t) >= mu
    """
    past = np.asarray(history, dtype=np.float64)
    past = past[past < t]
    if past.size == 0:
        return float(params.mu)
    return float(params.mu + params.alpha * np.exp(-params.beta * (t - past)).sum())


def sample_hawkes(params: HawkesParams, rng: np.random.Generator) -> List[float]:
    """
    Ogata thinning on [0, horizon].

    The bound lambda(t+) is exact between events because the kernel only
    decays, so it is recomputed after each candidate. The excitation sum is
    carried recursively: S(t + w) = S(t) * exp(-beta * w).

    Returns:
        Strictly ascending event times in [0, horizon]
    """
    if params.alpha / params.beta >= 1.0:
        raise ConfigError(f"supercritical Hawkes parameters: alpha/beta = {params.alpha / params.beta:.3f}")

    mu, alpha, beta, horizon = params.mu, params.alpha, params.beta, params.horizon
    events: List[float] = []
    t = 0.0
    excitation = 0.0
    while True:
        upper = mu + excitation
        w = rng.exponential(1.0 / upper)
        t_next = t + w
        if t_next > horizon:
            break
        excitation *= np.exp(-beta * w)
        intensity = mu + excitation
        u = rng.uniform()
        if u * upper <= intensity and w > 0.0:
            assert intensity <= upper, "thinning bound below intensity"
            events.append(t_next)
            excitation += alpha
        t = t_next
    return events
