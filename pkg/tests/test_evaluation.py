"""
Embeddings, probes, geometry, perturbations, robustness, reports and generation.
"""

import json
import math

import numpy as np
import pandas as pd
import pytest
from rich.console import Console

from src.core.errors import CheckpointError
from src.data.dataset import Dataset
from src.data.splitting import assign_split_tags
from src.evaluation import (
    EmbeddingMatrix,
    MetricsReport,
    anisotropy,
    extract_embeddings,
    feature_distribution_distance,
    generate_from_embeddings,
    geometry_correlation,
    intrinsic_dimension,
    linear_probe,
    nonlinear_probe,
    pct_change,
    perturb_dropout,
    perturb_shuffle,
    probe_split,
    robustness_report,
    score_predictions,
    tpp_probe,
)
from src.models.schemas import EventSequence
from src.trainers import random_checkpoint, train_method

from tests.conftest import make_dataset


def matrix(values, targets=None, split_tags=None):
    values = np.asarray(values, dtype=np.float64)
    targets = np.full(len(values), np.nan) if targets is None else np.asarray(targets, dtype=np.float64)
    return EmbeddingMatrix([f"s{i}" for i in range(len(values))], values, targets, split_tags)


@pytest.fixture
def random_ckpt(mixed_schema, small_encoder):
    return random_checkpoint(mixed_schema, small_encoder, seed=0)


class TestEmbeddings:
    def test_rows_follow_dataset_order(self, tiny_dataset, random_ckpt):
        emb = extract_embeddings(random_ckpt, tiny_dataset, batch_size=5)
        assert emb.ids == [s.id for s in tiny_dataset.sequences]
        assert emb.values.shape == (24, 8)
        assert emb.method == "random"
        assert np.array_equal(emb.targets, tiny_dataset.targets())

    def test_schema_mismatch(self, random_ckpt, numeric_schema):
        from src.core.errors import SchemaMismatchError
        with pytest.raises(SchemaMismatchError):
            extract_embeddings(random_ckpt, make_dataset(numeric_schema, n_sequences=3))

    def test_export_formats(self, tmp_path):
        emb = matrix([[1.0, 2.0], [3.0, 4.5]], [1.0, np.nan], ["train", "test"])
        binary = emb.save(tmp_path, "random-seed0", config_hash="h1")
        frame = pd.read_csv(tmp_path / "random-seed0.csv")
        assert list(frame.columns) == ["id", "target", "h_0", "h_1"]
        assert frame["h_1"].tolist() == [2.0, 4.5]
        meta = json.loads((tmp_path / "random-seed0.json").read_text())
        assert meta["shape"] == [2, 2] and meta["dtype"] == "float32"
        assert meta["targets"] == [1.0, None]
        loaded = EmbeddingMatrix.load(binary)
        assert np.array_equal(loaded.values, emb.values)
        assert loaded.split_tags == ["train", "test"]
        assert np.isnan(loaded.targets[1])

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            matrix([[1.0, math.inf]])
        with pytest.raises(ValueError):
            EmbeddingMatrix(["a"], np.zeros((2, 3)), np.zeros(2))


class TestGeometry:
    def test_isotropic_gaussian(self):
        x = np.random.default_rng(0).standard_normal((10_000, 16))
        assert anisotropy(x) == pytest.approx(1 / 16, rel=0.2)

    def test_rank_one(self):
        x = np.outer(np.arange(1.0, 6.0), [1.0, -2.0, 0.5])
        assert anisotropy(x, center=False) == pytest.approx(1.0)
        assert anisotropy(x) == pytest.approx(1.0)

    def test_anisotropy_ignores_rotation_and_scale(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((60, 4)) * [3.0, 1.0, 0.5, 0.2]
        rotation, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        moved = 2.5 * x @ rotation
        assert anisotropy(moved) == pytest.approx(anisotropy(x), abs=1e-10)
        assert anisotropy(moved, center=False) == pytest.approx(anisotropy(x, center=False), abs=1e-10)
        assert anisotropy(x + [4.0, -1.0, 0.0, 9.0]) == pytest.approx(anisotropy(x), abs=1e-10)

    def test_uncentered_closed_form(self):
        x = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        # singular values squared are 3 and 1
        assert anisotropy(x, center=False) == pytest.approx(0.75)

    def test_anisotropy_errors(self):
        with pytest.raises(ValueError):
            anisotropy(np.ones((1, 3)))
        with pytest.raises(ValueError):
            anisotropy(np.ones((4, 3)))

    @pytest.mark.parametrize("d", [1, 2, 4])
    def test_intrinsic_dimension_of_uniform_cube(self, d):
        x = np.random.default_rng(d).uniform(size=(5000, d))
        # embed in a higher ambient space
        ambient = np.hstack([x, np.zeros((5000, 3))])
        assert intrinsic_dimension(ambient) == pytest.approx(d, rel=0.2)

    def test_duplicates_are_ignored(self):
        x = np.random.default_rng(0).uniform(size=(200, 2))
        assert intrinsic_dimension(np.vstack([x, x[:50]])) == intrinsic_dimension(x)

    def test_intrinsic_dimension_ignores_scale_and_rigid_motion(self):
        rng = np.random.default_rng(4)
        x = np.hstack([rng.uniform(size=(500, 3)), np.zeros((500, 2))])
        rotation, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        moved = 4.0 * x @ rotation + rng.standard_normal(5)
        assert intrinsic_dimension(moved) == pytest.approx(intrinsic_dimension(x), rel=1e-9)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            intrinsic_dimension(np.random.default_rng(0).uniform(size=(9, 2)))

    def test_correlation_orients_lower_is_better(self):
        cells = pd.DataFrame({
            "method": ["a", "b", "c", "d"],
            "dataset": ["pendulum"] * 4,
            "metric": ["mse"] * 4,
            "value": [0.1, 0.2, 0.3, 0.4],
            "anisotropy": [0.1, 0.2, 0.3, 0.4],
            "intrinsic_dimension": [8.0, 6.0, 4.0, 2.0],
        })
        result = geometry_correlation(cells)
        assert result["anisotropy"]["pearson"] == pytest.approx(-1.0)
        assert result["anisotropy"]["spearman"] == pytest.approx(-1.0)
        assert result["intrinsic_dimension"]["spearman"] == pytest.approx(1.0)

    def test_correlation_requires_columns(self):
        with pytest.raises(ValueError, match="anisotropy"):
            geometry_correlation([{"dataset": "d", "metric": "mse", "value": 1.0, "intrinsic_dimension": 2.0}])


class TestProbes:
    def test_separable_binary(self):
        rng = np.random.default_rng(0)
        y = np.arange(200) % 2
        x = rng.normal(size=(200, 4))
        x[:, 0] += 6.0 * y
        result = linear_probe(matrix(x, y), "binary")
        assert result.metric == "roc_auc"
        assert result.value == pytest.approx(1.0)

    def test_xor_needs_nonlinear_probe(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-1, 1, size=(800, 2))
        y = ((x[:, 0] > 0) ^ (x[:, 1] > 0)).astype(float)
        emb = matrix(x, y)
        assert linear_probe(emb, "binary").value < 0.7
        assert nonlinear_probe(emb, "binary", n_iterations=100).value > 0.9

    def test_linear_regression(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(300, 3))
        y = 2.0 * x[:, 0] - x[:, 2] + 0.01 * rng.normal(size=300)
        result = linear_probe(matrix(x, y), "regression")
        assert result.metric == "mse"
        assert result.value < 0.01

    def test_multiclass_accuracy(self):
        rng = np.random.default_rng(3)
        y = np.arange(300) % 3
        x = rng.normal(size=(300, 3)) * 0.1
        x[np.arange(300), y] += 1.0
        result = linear_probe(matrix(x, y), "multiclass")
        assert result.metric == "accuracy"
        assert result.value > 0.95

    def test_independent_labels_score_chance(self):
        rng = np.random.default_rng(4)
        emb = matrix(rng.normal(size=(2000, 8)), rng.integers(0, 2, size=2000))
        assert 0.45 <= linear_probe(emb, "binary", test_fraction=0.5).value <= 0.55

    def test_split_uses_test_tags(self):
        tags = ["train", "test", "val", "test", "train"]
        emb = matrix(np.eye(5), [0, 1, 0, 1, np.nan], tags)
        train, test = probe_split(emb)
        assert test.tolist() == [1, 3]
        assert train.tolist() == [0, 2]

    def test_random_split_is_disjoint_and_seeded(self):
        emb = matrix(np.eye(10), np.arange(10))
        train, test = probe_split(emb, 0.3, seed=1)
        assert len(test) == 3 and len(np.intersect1d(train, test)) == 0
        assert probe_split(emb, 0.3, seed=1)[1].tolist() == test.tolist()

    def test_single_training_class(self):
        emb = matrix(np.random.default_rng(0).normal(size=(10, 2)), [0] * 9 + [1],
                     ["train"] * 9 + ["test"])
        with pytest.raises(ValueError, match="single class"):
            linear_probe(emb, "binary")

    def test_unknown_task(self):
        with pytest.raises(ValueError):
            linear_probe(matrix(np.eye(4), [0, 1, 0, 1]), "ranking")

    def test_score_predictions_needs_both_classes(self):
        with pytest.raises(ValueError):
            score_predictions("binary", np.ones(3), np.full((3, 2), 0.5))


class TestNextEventProbe:
    def test_categorical_target(self, tiny_dataset, random_ckpt):
        result = tpp_probe(random_ckpt, tiny_dataset)
        assert result.metric == "accuracy"
        assert 0.0 <= result.value <= 1.0

    def test_time_target_without_categoricals(self, numeric_schema, small_encoder):
        dataset = make_dataset(numeric_schema, n_sequences=20)
        result = tpp_probe(random_checkpoint(numeric_schema, small_encoder), dataset)
        assert result.metric == "mse"

    def test_single_value_feature(self, tiny_dataset, random_ckpt):
        for seq in tiny_dataset.sequences:
            seq.cat_values["mcc"] = [3] * len(seq)
        assert tuple(tpp_probe(random_ckpt, tiny_dataset)) == ("accuracy", 1.0)

    def test_needs_two_events(self, mixed_schema, random_ckpt):
        dataset = make_dataset(mixed_schema, n_sequences=4, min_len=1, max_len=1)
        with pytest.raises(ValueError, match="two events"):
            tpp_probe(random_ckpt, dataset)


class TestPerturbations:
    def test_shuffle_keeps_events(self, tiny_dataset):
        out = perturb_shuffle(tiny_dataset, np.random.default_rng(0))
        for before, after in zip(tiny_dataset.sequences, out.sequences):
            events = sorted(zip(before.times, before.cat_values["mcc"], before.num_values["amount"]))
            assert sorted(zip(after.times, after.cat_values["mcc"], after.num_values["amount"])) == events
            assert after.target == before.target

    def test_dropout_levels(self, tiny_dataset):
        assert perturb_dropout(tiny_dataset, 0.0, np.random.default_rng(0)).sequences == tiny_dataset.sequences
        heavy = perturb_dropout(tiny_dataset, 0.9, np.random.default_rng(0))
        assert all(len(s) >= 1 for s in heavy.sequences)
        assert heavy.lengths().sum() < tiny_dataset.lengths().sum()
        for before, after in zip(tiny_dataset.sequences, heavy.sequences):
            assert set(after.times) <= set(before.times)
            assert after.times == sorted(after.times)
        with pytest.raises(ValueError):
            perturb_dropout(tiny_dataset, 1.0)

    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7])
    def test_dropout_keeps_expected_share(self, numeric_schema, p):
        dataset = make_dataset(numeric_schema, n_sequences=1000, min_len=20, max_len=20)
        out = perturb_dropout(dataset, p, np.random.default_rng(7))
        kept = out.lengths().sum() / dataset.lengths().sum()
        assert kept == pytest.approx(1.0 - p, abs=0.03)

    def test_pct_change_sign(self):
        assert pct_change("mse", 1.0, 2.0) == pytest.approx(-100.0)
        assert pct_change("roc_auc", 0.8, 0.4) == pytest.approx(-50.0)
        assert pct_change("accuracy", 0.5, 0.6) == pytest.approx(20.0)
        assert pct_change("mse", 0.0, 0.0) == 0.0
        assert pct_change("mse", 0.0, 0.1) == -math.inf

    def test_robustness_report(self, numeric_schema, small_encoder):
        dataset = make_dataset(numeric_schema, n_sequences=30, min_len=4)
        ckpt = random_checkpoint(numeric_schema, small_encoder, seed=0)
        report = robustness_report(ckpt, dataset, grid=(0.1, 0.5), seeds=[0, 1])
        assert len(report.samples) == 2 * (1 + 1 + 2)
        for sample in report.samples:
            assert sample.metric == "mse"
            if sample.perturbation == "none":
                assert sample.pct_change == 0.0
        rows = report.robustness_rows()
        assert {(r.perturbation, r.p) for r in rows} == {("none", 0.0), ("shuffle", 0.0), ("dropout", 0.1), ("dropout", 0.5)}
        assert all(r.n_seeds == 2 for r in rows)
        series = report.dropout_series()
        assert series["p"].tolist() == [0.0, 0.1, 0.5]
        again = robustness_report(ckpt, dataset, grid=(0.1, 0.5), seeds=[0, 1])
        assert [s.value for s in again.samples] == [s.value for s in report.samples]


class TestReport:
    def make_report(self):
        report = MetricsReport()
        for seed, value in [(0, 0.5), (1, 0.7)]:
            report.add("mlem", "pendulum", "linear", seed, "mse", value)
            report.add("mlem", "pendulum", "geometry", seed, "anisotropy", 0.2 + seed * 0.1)
            report.add("mlem", "pendulum", "geometry", seed, "intrinsic_dimension", 3.0)
        report.add("random", "pendulum", "linear", 0, "mse", 2.0)
        report.add("random", "pendulum", "geometry", 0, "anisotropy", 0.9)
        report.add("random", "pendulum", "geometry", 0, "intrinsic_dimension", 1.0)
        return report

    def test_summary(self):
        summary = self.make_report().summary()
        row = summary[(summary.method == "mlem") & (summary.probe == "linear")].iloc[0]
        assert row["mean"] == pytest.approx(0.6)
        assert row["std"] == pytest.approx(np.std([0.5, 0.7], ddof=1))
        assert row["n_seeds"] == 2
        single = summary[(summary.method == "random") & (summary.probe == "linear")].iloc[0]
        assert single["std"] == 0.0

    def test_merge_is_order_independent(self):
        a, b = MetricsReport(), MetricsReport()
        a.add("mlem", "d", "linear", 1, "mse", 1.0)
        b.add("mlem", "d", "linear", 0, "mse", 2.0)
        assert MetricsReport.merge([a, b]).records == MetricsReport.merge([b, a]).records

    def test_geometry_cells(self):
        cells = self.make_report().geometry_cells()
        assert set(cells["method"]) == {"mlem", "random"}
        mlem = cells[cells.method == "mlem"].iloc[0]
        assert mlem["anisotropy"] == pytest.approx(0.25)
        assert mlem["value"] == pytest.approx(0.6)

    def test_save_load_and_render(self, tmp_path):
        report = self.make_report().tag(run_id="run-1", config_hash="abc")
        paths = report.save(tmp_path)
        assert set(paths) == {"metrics", "summary"}
        loaded = MetricsReport.load(tmp_path)
        assert loaded.records == report.records
        console = Console(record=True, width=140)
        loaded.render(console, title="Pendulum")
        assert "mlem" in console.export_text()

    def test_load_requires_metrics(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            MetricsReport.load(tmp_path)


class TestGeneration:
    def test_rollout_from_embeddings(self, tiny_dataset, fast_train, small_encoder, small_decoder):
        ckpt = train_method("generative", tiny_dataset, train_config=fast_train, encoder_config=small_encoder,
                            decoder_config=small_decoder)
        generated = generate_from_embeddings(ckpt, tiny_dataset, seed=0)
        assert len(generated) == len(tiny_dataset)
        for source, seq in zip(tiny_dataset.sequences, generated.sequences):
            assert seq.id == f"gen-{source.id}"
            assert len(seq) == len(source)
            assert seq.times[0] == source.times[0]
            assert seq.target == source.target
        capped = generate_from_embeddings(ckpt, tiny_dataset, max_len=2, greedy=True)
        assert max(len(s) for s in capped.sequences) == 2
        distances = feature_distribution_distance(tiny_dataset, generated)
        assert set(distances) == {"mcc", "amount", "dt"}
        assert all(0.0 <= d <= 1.0 for d in distances.values())

    def test_identical_distributions(self, tiny_dataset):
        distances = feature_distribution_distance(tiny_dataset, tiny_dataset)
        assert all(d == 0.0 for d in distances.values())

    def test_needs_a_decoder(self, tiny_dataset, random_ckpt):
        with pytest.raises(CheckpointError):
            generate_from_embeddings(random_ckpt, tiny_dataset)
