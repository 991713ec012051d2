"""
Damped pendulum dynamics.

    theta'' = -(b / m) * theta' - (g / L) * sin(theta)

integrated with classical fixed-step RK4 on a dense grid. Values at
arbitrary times use cubic Hermite interpolation of theta with theta' as
the node derivative, which keeps the fourth-order accuracy of the grid.
Coordinates are unit-normalised: x = sin(theta), y = -cos(theta).
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..models.schemas import PendulumParams


DEFAULT_STEP = 1e-3


def _rhs(theta: np.ndarray, omega: np.ndarray, damping: np.ndarray, stiffness: np.ndarray):
    return omega, -damping * omega - stiffness * np.sin(theta)


def integrate_many(
    damping: np.ndarray,
    stiffness: np.ndarray,
    theta0: np.ndarray,
    omega0: np.ndarray,
    t_end: float,
    step: float = DEFAULT_STEP,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    RK4 for a batch of independent pendulums.

    Args:
        damping: b / m per pendulum
        stiffness: g / L per pendulum
        theta0: Initial angles
        omega0: Initial angular velocities
        t_end: Last time to cover
        step: Fixed step size

    Returns:
        (grid, theta, omega) with theta/omega of shape (len(grid), n)
    """
    n_steps = max(1, int(np.ceil(t_end / step - 1e-9)))
    grid = np.arange(n_steps + 1, dtype=np.float64) * step
    theta = np.empty((n_steps + 1, theta0.size), dtype=np.float64)
    omega = np.empty_like(theta)
    th = np.asarray(theta0, dtype=np.float64).copy()
    om = np.asarray(omega0, dtype=np.float64).copy()
    theta[0], omega[0] = th, om

    half = 0.5 * step
    for k in range(1, n_steps + 1):
        k1t, k1o = _rhs(th, om, damping, stiffness)
        k2t, k2o = _rhs(th + half * k1t, om + half * k1o, damping, stiffness)
        k3t, k3o = _rhs(th + half * k2t, om + half * k2o, damping, stiffness)
        k4t, k4o = _rhs(th + step * k3t, om + step * k3o, damping, stiffness)
        th = th + step / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
        om = om + step / 6.0 * (k1o + 2 * k2o + 2 * k3o + k4o)
        theta[k], omega[k] = th, om
    return grid, theta, omega


def integrate_pendulum(params: PendulumParams, t_end: float, step: float = DEFAULT_STEP):
    """Dense-grid trajectory of one pendulum: (grid, theta, omega)."""
    grid, theta, omega = integrate_many(
        np.array([params.b / params.m]),
        np.array([params.g / params.L]),
        np.array([params.theta0]),
        np.array([params.omega0]),
        t_end,
        step,
    )
    return grid, theta[:, 0], omega[:, 0]


def hermite_theta(grid: np.ndarray, theta: np.ndarray, omega: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Cubic Hermite interpolation of one angle trajectory at ``times``."""
    times = np.asarray(times, dtype=np.float64)
    step = grid[1] - grid[0]
    k = np.clip(np.floor(times / step).astype(np.int64), 0, grid.size - 2)
    s = (times - grid[k]) / step
    s2, s3 = s * s, s * s * s
    h00 = 2 * s3 - 3 * s2 + 1
    h10 = s3 - 2 * s2 + s
    h01 = -2 * s3 + 3 * s2
    h11 = s3 - s2
    return h00 * theta[k] + h10 * step * omega[k] + h01 * theta[k + 1] + h11 * step * omega[k + 1]


def to_coordinates(theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unit-circle bob position, pivot at the origin."""
    return np.sin(theta), -np.cos(theta)


def simulate_pendulum(
    params: PendulumParams, times: Sequence[float], step: float = DEFAULT_STEP
) -> List[Tuple[float, float]]:
    """
    Unit-normalised bob coordinates at each requested time.

    Args:
        params: Pendulum parameters and initial state
        times: Ascending, non-negative times
        step: RK4 step size

    Returns:
        List of (x, y) with x^2 + y^2 = 1
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size == 0:
        return []
    grid, theta, omega = integrate_pendulum(params, float(times[-1]), step)
    x, y = to_coordinates(hermite_theta(grid, theta, omega, times))
    return list(zip(x.tolist(), y.tolist()))


def pendulum_energy(params: PendulumParams, theta: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Mechanical energy 1/2 m L^2 theta'^2 + m g L (1 - cos theta)."""
    m, g, length = params.m, params.g, params.L
    return 0.5 * m * length ** 2 * omega ** 2 + m * g * length * (1.0 - np.cos(theta))
