"""
Configuration, logging, CSV export, hashing and schema models.
"""

import csv
import pickle

import pytest
from pydantic import ValidationError

from src.core.config import Config, get_config, reset_config, set_config
from src.core.csv_exporter import CSVExporter
from src.core.errors import CheckpointError, DatasetFormatError, StageError
from src.core.logger import WorkbenchLogger, get_logger
from src.models.schemas import (
    CategoricalFeature,
    DecoderConfig,
    EventSequence,
    FeatureSchema,
    HawkesParams,
    NumericFeature,
    RARE_CODE,
    RunConfig,
    TrainConfig,
)
from src.utils.hashing import config_hash, generate_id


class TestConfig:
    def test_dot_notation_and_defaults(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("training:\n  lr: 0.01\n  seeds: [1, 2]\nmodel:\n  encoder:\n    hidden_size: 16\n")
        config = Config(str(path))
        assert config.get("training.lr") == 0.01
        assert config.get("model.encoder.hidden_size") == 16
        assert config.get("training.missing", "fallback") == "fallback"
        assert config.training["seeds"] == [1, 2]

    def test_missing_file_gives_empty_sections(self, tmp_path):
        config = Config(str(tmp_path / "absent.yaml"))
        assert config.get_section("training") == {}
        assert TrainConfig.from_config(config).lr == 1e-3

    def test_set_creates_sections(self):
        config = Config(config_path=None, data={})
        config.set("data.split_seed", 7)
        assert config.get("data.split_seed") == 7
        assert config.to_dict() == {"data": {"split_seed": 7}}

    def test_global_instance(self):
        reset_config()
        installed = set_config(Config(config_path=None, data={"training": {"lr": 0.5}}))
        assert get_config() is installed
        assert TrainConfig.from_config(get_config(), batch_size=4).batch_size == 4


class TestLogger:
    def test_children_share_root(self):
        logger = get_logger("src.trainers.base")
        assert logger.name == "workbench.src.trainers.base"

    def test_file_handler_writes(self, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        WorkbenchLogger.configure(log_file=str(log_file), level="INFO", console_output=False)
        get_logger("test").info("hello workbench")
        for handler in get_logger().handlers:
            handler.flush()
        assert "hello workbench" in log_file.read_text()


class TestCSVExporter:
    def test_export_and_append(self, tmp_path):
        exporter = CSVExporter(output_dir=str(tmp_path))
        exporter.export([{"a": 1, "b": 0.1}], "rows.csv")
        exporter.export([{"a": 2, "b": None}], "rows.csv", append=True)
        with open(tmp_path / "rows.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert rows == [{"a": "1", "b": "0.1"}, {"a": "2", "b": ""}]

    def test_floats_keep_full_precision(self, tmp_path):
        exporter = CSVExporter(output_dir=str(tmp_path))
        value = 1.0 / 3.0
        exporter.export([{"v": value}], "v.csv")
        with open(tmp_path / "v.csv", newline="") as f:
            assert float(next(csv.DictReader(f))["v"]) == value


class TestHashing:
    def test_key_order_does_not_matter(self):
        assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
        assert config_hash({"a": 1}) != config_hash({"a": 2})

    def test_generate_id_length(self):
        assert len(generate_id("x", 1)) == 16


class TestErrors:
    def test_dataset_error_reports_location(self):
        error = DatasetFormatError("bad", line=3, sequence_id="s1")
        assert error.line == 3
        assert "line 3" in str(error) and "'s1'" in str(error)
        assert isinstance(error, ValueError)

    def test_stage_error_names_stage_and_seed(self):
        error = StageError("pretrain:mlem", 2, RuntimeError("boom"))
        assert "pretrain:mlem" in str(error) and "seed=2" in str(error)

    def test_errors_survive_pickling(self):
        error = pickle.loads(pickle.dumps(StageError("pretrain:mlem", 2, CheckpointError("truncated"))))
        assert error.stage == "pretrain:mlem" and error.seed == 2
        assert isinstance(error.cause, CheckpointError)
        assert "truncated" in str(error)
        located = pickle.loads(pickle.dumps(DatasetFormatError("bad", line=3, sequence_id="s1")))
        assert (located.message, located.line, located.sequence_id) == ("bad", 3, "s1")
        assert str(located) == "bad (line 3, sequence 's1')"


class TestSchemas:
    def test_feature_names_unique(self):
        with pytest.raises(ValidationError):
            FeatureSchema(numeric=[NumericFeature(name="x"), NumericFeature(name="x")])

    def test_dt_is_reserved(self):
        with pytest.raises(ValidationError):
            FeatureSchema(numeric=[NumericFeature(name="dt")])

    def test_target_classes(self):
        assert FeatureSchema(target_kind="binary").n_classes == 2
        with pytest.raises(ValidationError):
            FeatureSchema(target_kind="multiclass")

    def test_vocabulary_encoding(self):
        feature = CategoricalFeature(name="mcc", vocab_size=4, vocabulary=["food", "travel"])
        assert feature.encode("food") == 2
        assert feature.encode("travel") == 3
        assert feature.encode("unknown") == RARE_CODE
        assert feature.encode(3) == 3
        with pytest.raises(ValidationError):
            CategoricalFeature(name="bad", vocab_size=5, vocabulary=["one"])

    def test_sequence_invariants(self):
        with pytest.raises(ValidationError):
            EventSequence(id="s", times=[])
        with pytest.raises(ValidationError):
            EventSequence(id="s", times=[1.0, 0.5])
        with pytest.raises(ValidationError):
            EventSequence(id="s", times=[0.0, 1.0], num_values={"x": [1.0]})
        seq = EventSequence(id="s", times=[0.0, 0.0, 1.0], num_values={"x": [1.0, 2.0, 3.0]})
        assert len(seq) == 3

    def test_blank_ids_rejected(self):
        for blank in ["", "   "]:
            with pytest.raises(ValidationError):
                EventSequence(id=blank, times=[0.0])
        assert EventSequence(id=" a ", times=[0.0]).id == " a "

    def test_select_copies_columns(self):
        seq = EventSequence(id="s", times=[0.0, 1.0, 2.0], cat_values={"c": [2, 3, 4]}, target=1.0)
        part = seq.select([2, 0])
        assert part.times == [2.0, 0.0]
        assert part.cat_values == {"c": [4, 2]}
        assert part.target == 1.0
        assert seq.times == [0.0, 1.0, 2.0]

    def test_hawkes_must_be_subcritical(self):
        assert HawkesParams().stationary_rate == pytest.approx(12.5)
        with pytest.raises(ValidationError):
            HawkesParams(alpha=1.0, beta=1.0)

    def test_epoch_rule(self):
        config = TrainConfig()
        assert config.resolve_epochs(99_999) == 100
        assert config.resolve_epochs(100_000) == 40
        assert TrainConfig(epochs=3).resolve_epochs(10) == 3

    def test_train_config_validation(self):
        with pytest.raises(ValidationError):
            TrainConfig(view_range=(0.9, 0.4))
        with pytest.raises(ValidationError):
            TrainConfig(n_views=1)
        with pytest.raises(ValidationError):
            TrainConfig(seeds=[])

    def test_decoder_heads_divide_width(self):
        with pytest.raises(ValidationError):
            DecoderConfig(model_dim=10, heads=3)

    def test_run_config_methods(self):
        assert RunConfig(dataset="d.jsonl", methods=["mlem", "naive"]).seeds == [0, 1, 2]
        with pytest.raises(ValidationError):
            RunConfig(dataset="d.jsonl", methods=["bert"])
