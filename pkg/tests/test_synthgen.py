"""
Hawkes sampler, pendulum integrator and the pendulum dataset.
"""

import numpy as np
import pytest

from src.core.errors import ConfigError
from src.models.schemas import HawkesParams, PendulumParams
from src.synthgen import (
    generate_pendulum_dataset,
    hawkes_intensity,
    integrate_pendulum,
    pendulum_energy,
    sample_hawkes,
    simulate_pendulum,
)
from src.synthgen.generator import PendulumDatasetSettings


class TestHawkes:
    def test_intensity(self):
        params = HawkesParams(mu=2.0, alpha=0.5, beta=1.0)
        assert hawkes_intensity(params, [], 1.0) == 2.0
        expected = 2.0 + 0.5 * np.exp(-1.0) + 0.5 * np.exp(-0.5)
        assert hawkes_intensity(params, [0.0, 0.5, 3.0], 1.0) == pytest.approx(expected)

    def test_samples_are_ascending_inside_horizon(self):
        times = sample_hawkes(HawkesParams(horizon=5.0), np.random.default_rng(1))
        assert times
        assert all(b > a for a, b in zip(times, times[1:]))
        assert 0.0 <= times[0] and times[-1] <= 5.0

    def test_supercritical_is_rejected(self):
        params = HawkesParams.model_construct(mu=1.0, alpha=2.0, beta=1.0, horizon=1.0)
        with pytest.raises(ConfigError):
            sample_hawkes(params, np.random.default_rng(0))

    @pytest.mark.slow
    def test_mean_count_matches_stationary_rate(self):
        params = HawkesParams(horizon=100.0)
        rng = np.random.default_rng(0)
        counts = [len(sample_hawkes(params, rng)) for _ in range(200)]
        # transient at t=0 lowers the count slightly below rate * horizon = 1250
        assert np.mean(counts) == pytest.approx(1250.0, rel=0.05)

    @pytest.mark.slow
    def test_no_excitation_is_poisson(self):
        params = HawkesParams(mu=10.0, alpha=0.0, beta=1.0, horizon=1.0)
        rng = np.random.default_rng(1)
        counts = np.array([len(sample_hawkes(params, rng)) for _ in range(20000)])
        assert counts.mean() == pytest.approx(10.0, rel=0.05)
        assert counts.var(ddof=1) == pytest.approx(10.0, rel=0.05)

    @pytest.mark.slow
    def test_excitation_over_disperses_counts(self):
        params = HawkesParams(mu=10.0, alpha=0.8, beta=1.0, horizon=1.0)
        rng = np.random.default_rng(2)
        counts = np.array([len(sample_hawkes(params, rng)) for _ in range(3000)])
        assert counts.var(ddof=1) > 1.2 * counts.mean()


class TestPendulum:
    def test_undamped_energy_is_conserved(self):
        params = PendulumParams(b=0.0, L=2.0, theta0=1.0, omega0=0.5)
        _, theta, omega = integrate_pendulum(params, 10.0)
        energy = pendulum_energy(params, theta, omega)
        assert np.max(np.abs(energy - energy[0])) / energy[0] < 1e-8

    def test_damping_removes_energy(self):
        params = PendulumParams(b=0.5, theta0=1.0)
        _, theta, omega = integrate_pendulum(params, 5.0)
        energy = pendulum_energy(params, theta, omega)
        assert energy[-1] < 0.5 * energy[0]

    def test_small_angle_period(self):
        params = PendulumParams(b=0.0, L=1.0, theta0=0.01)
        period = 2 * np.pi * np.sqrt(params.L / params.g)
        (x0, _), (x1, _) = simulate_pendulum(params, [0.0, period])
        assert x1 == pytest.approx(x0, rel=1e-3)

    def test_halving_the_step_changes_little(self):
        params = PendulumParams(L=1.5, theta0=2.0, omega0=1.0)
        times = [0.1234, 0.5, 1.7, 3.3, 6.9]
        coarse = np.array(simulate_pendulum(params, times, step=1e-3))
        fine = np.array(simulate_pendulum(params, times, step=5e-4))
        assert np.max(np.abs(coarse - fine)) < 1e-6

    def test_period_from_zero_crossings(self):
        params = PendulumParams(b=0.0, L=2.0, theta0=0.05)
        grid, theta, _ = integrate_pendulum(params, 20.0)
        crossing = np.flatnonzero(np.sign(theta[:-1]) != np.sign(theta[1:]))
        # linear interpolation inside each bracketing step
        roots = grid[crossing] - theta[crossing] * (grid[crossing + 1] - grid[crossing]) / (theta[crossing + 1] - theta[crossing])
        assert len(roots) >= 4
        period = 2.0 * np.mean(np.diff(roots))
        assert period == pytest.approx(2 * np.pi * np.sqrt(params.L / params.g), rel=0.01)

    def test_coordinates_on_unit_circle(self):
        points = simulate_pendulum(PendulumParams(theta0=2.0, omega0=3.0), [0.0, 0.3337, 1.5, 4.2])
        assert points[0][0] == pytest.approx(np.sin(2.0))
        for x, y in points:
            assert x * x + y * y == pytest.approx(1.0)
        assert simulate_pendulum(PendulumParams(), []) == []


class TestPendulumDataset:
    def test_generation_is_deterministic(self):
        settings = PendulumDatasetSettings(hawkes=HawkesParams(horizon=1.0))
        first = generate_pendulum_dataset(6, seed=4, settings=settings)
        second = generate_pendulum_dataset(6, seed=4, settings=settings)
        assert first.sequences == second.sequences
        other = generate_pendulum_dataset(6, seed=5, settings=settings)
        assert other.sequences != first.sequences

    def test_sequences_do_not_depend_on_chunking(self):
        small = PendulumDatasetSettings(hawkes=HawkesParams(horizon=1.0), chunk_size=2)
        large = PendulumDatasetSettings(hawkes=HawkesParams(horizon=1.0), chunk_size=64)
        a = generate_pendulum_dataset(5, seed=0, settings=small)
        b = generate_pendulum_dataset(5, seed=0, settings=large)
        for sa, sb in zip(a.sequences, b.sequences):
            assert sa.times == sb.times
            assert sa.target == sb.target
            assert np.allclose(sa.num_values["x"], sb.num_values["x"], atol=1e-9)

    def test_records_follow_schema(self):
        dataset = generate_pendulum_dataset(8, seed=0, settings=PendulumDatasetSettings(hawkes=HawkesParams(horizon=2.0)))
        dataset.conform()
        assert dataset.schema.numeric_names == ["x", "y"]
        assert dataset.schema.target_kind == "regression"
        for seq in dataset.sequences:
            assert 0.5 <= seq.target <= 5.0
            assert len(seq) >= 1
            assert all(0.0 <= t <= 2.0 for t in seq.times)
            xy = np.array([seq.num_values["x"], seq.num_values["y"]])
            assert np.allclose((xy ** 2).sum(axis=0), 1.0)

    def test_rejects_empty_request(self):
        with pytest.raises(ValueError):
            generate_pendulum_dataset(0)
