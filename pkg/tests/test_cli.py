"""
Command-line surface, end to end on a tiny pendulum dataset.
"""

import csv

import pytest
import yaml
from typer.testing import CliRunner

from src.cli import app
from src.core.checkpoint import ModelCheckpoint
from src.data.dataset import load_dataset


runner = CliRunner()


@pytest.fixture
def config_file(tmp_path):
    config = {
        "data": {"rare_min_count": 1, "max_length": 50, "split_ratios": [0.8, 0.1, 0.1], "split_seed": 0},
        "synthgen": {"horizon": 1.0},
        "model": {
            "encoder": {"hidden_size": 8, "feature_embed_dim": 4},
            "projector": {"output_dim": 6},
            "decoder": {"layers": 1, "heads": 2, "model_dim": 8, "ff_dim": 16},
        },
        "training": {"epochs": 1, "batch_size": 16, "seeds": [0], "deterministic": True},
        "evaluation": {"boosting": {"max_depth": 2, "max_iter": 10}, "perturbation_seeds": [0]},
        "logging": {"file": None, "level": "WARNING", "console_output": False},
    }
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(config))
    return path


def invoke(config_file, *args):
    result = runner.invoke(app, ["--config", str(config_file), *map(str, args)])
    return result


@pytest.fixture
def pendulum_file(tmp_path, config_file):
    path = tmp_path / "data" / "pendulum.jsonl"
    result = invoke(config_file, "gen-data", "--n", 30, "--seed", 3, "--out", path)
    assert result.exit_code == 0, result.output
    return path


def run_dirs(out):
    return sorted(p for p in out.iterdir() if p.is_dir())


class TestDataCommands:
    def test_gen_data_is_repeatable(self, tmp_path, config_file, pendulum_file):
        again = tmp_path / "again.jsonl"
        result = invoke(config_file, "gen-data", "--n", 30, "--seed", 3, "--out", again)
        assert result.exit_code == 0
        assert again.read_bytes() == pendulum_file.read_bytes()
        assert pendulum_file.with_name("pendulum.schema.json").exists()
        assert "mean length" in result.output

    def test_gen_data_writes_to_out(self, tmp_path, config_file):
        target = tmp_path / "nested" / "custom.jsonl"
        result = invoke(config_file, "--out", tmp_path / "runs", "gen-data", "--n", 5, "--seed", 1, "--out", target)
        assert result.exit_code == 0, result.output
        assert target.exists()
        assert target.with_name("custom.schema.json").exists()
        assert len(load_dataset(target)) == 5
        assert not (tmp_path / "runs").exists()

    def test_preprocess_tags_splits(self, tmp_path, config_file, pendulum_file):
        output = tmp_path / "prepared" / "pendulum.jsonl"
        result = invoke(config_file, "preprocess", pendulum_file, "--output", output)
        assert result.exit_code == 0, result.output
        prepared = load_dataset(output)
        assert len(prepared) == 30
        assert set(prepared.split_tags) == {"train", "val", "test"}
        assert all(s.times[0] == 0.0 for s in prepared.sequences)

    def test_format_error_exits_with_one(self, tmp_path, config_file, pendulum_file):
        broken = tmp_path / "data" / "broken.jsonl"
        broken.write_text('{"id": "x", "t": [1, 0], "num": {"x": [0, 0], "y": [1, 1]}}\n')
        pendulum_file.with_name("pendulum.schema.json").replace(broken.with_name("broken.schema.json"))
        result = invoke(config_file, "preprocess", broken, "--output", tmp_path / "out.jsonl")
        assert result.exit_code == 1
        assert "line 1" in result.output


class TestModelCommands:
    def test_pretrain_probe_analyze_perturb(self, tmp_path, config_file, pendulum_file):
        ckpt = tmp_path / "ckpts" / "mlem-seed0.ckpt"
        result = invoke(config_file, "pretrain", pendulum_file, "--method", "mlem", "--output", ckpt)
        assert result.exit_code == 0, result.output
        assert ckpt.with_name("contrastive-seed0.ckpt").exists()
        assert ModelCheckpoint.load(ckpt).method == "mlem"

        export = tmp_path / "emb"
        result = invoke(config_file, "probe", ckpt, pendulum_file, "--kind", "linear,tpp", "--export", export)
        assert result.exit_code == 0, result.output
        assert "mse" in result.output
        assert (export / "mlem-seed0.f32").exists()

        result = invoke(config_file, "analyze", ckpt, pendulum_file)
        assert result.exit_code == 0, result.output
        assert "intrinsic dimension" in result.output

        result = invoke(config_file, "perturb", ckpt, pendulum_file, "--grid", "0.5", "--output", tmp_path / "robust")
        assert result.exit_code == 0, result.output
        assert (tmp_path / "robust" / "robustness.csv").exists()

    def test_finetune_rejects_wrong_task(self, tmp_path, config_file, pendulum_file):
        ckpt = tmp_path / "c.ckpt"
        assert invoke(config_file, "pretrain", pendulum_file, "--method", "contrastive", "--output", ckpt).exit_code == 0
        result = invoke(config_file, "finetune", ckpt, pendulum_file, "--task", "binary")
        assert result.exit_code == 1
        result = invoke(config_file, "finetune", ckpt, pendulum_file, "--output", tmp_path / "tuned.ckpt")
        assert result.exit_code == 0, result.output
        assert "mse" in result.output

    def test_unknown_probe(self, tmp_path, config_file, pendulum_file):
        ckpt = tmp_path / "r.ckpt"
        assert invoke(config_file, "pretrain", pendulum_file, "--method", "random", "--output", ckpt).exit_code == 0
        assert invoke(config_file, "probe", ckpt, pendulum_file, "--kind", "magic").exit_code == 1


class TestPipeline:
    def test_run_resume_and_report(self, tmp_path, config_file, pendulum_file):
        out = tmp_path / "runs"
        result = invoke(config_file, "--out", out, "pipeline", "--dataset", pendulum_file,
                        "--methods", "contrastive,mlem", "--no-robustness")
        assert result.exit_code == 0, result.output
        (run,) = run_dirs(out)
        assert (run / "config.json").exists()
        assert (run / "data" / "pendulum.jsonl").exists()
        for method in ("random", "contrastive", "mlem"):
            assert (run / "ckpts" / f"{method}-seed0.ckpt").exists()
            assert (run / "embeddings" / f"{method}-seed0.f32").exists()
        metrics = (run / "reports" / "metrics.csv").read_text()
        with open(run / "reports" / "metrics.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        probes = {(r["method"], r["probe"]) for r in rows}
        assert ("mlem", "linear") in probes and ("random", "geometry") in probes
        assert all(r["config_hash"] and r["run_id"] == run.name for r in rows)

        result = invoke(config_file, "--out", out, "pipeline", "--resume", run)
        assert result.exit_code == 0, result.output
        assert (run / "reports" / "metrics.csv").read_text() == metrics
        with open(out / "run_log.csv", newline="") as f:
            assert len(list(csv.DictReader(f))) == 2 * len(rows)

        result = invoke(config_file, "report", run, "--correlate")
        assert result.exit_code == 0, result.output
        assert "anisotropy" in result.output

    def test_pipeline_needs_a_dataset(self, tmp_path, config_file):
        result = invoke(config_file, "--out", tmp_path / "runs", "pipeline")
        assert result.exit_code == 1

    def test_unknown_method(self, tmp_path, config_file, pendulum_file):
        result = invoke(config_file, "--out", tmp_path / "runs", "pipeline", "-d", pendulum_file, "-m", "bert")
        assert result.exit_code == 1
