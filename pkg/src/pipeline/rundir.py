"""
Run directory layout::

    <out>/<timestamp>-<hash>/
        config.json      resolved configuration and its hash
        data/            preprocessed, split-tagged dataset
        ckpts/           <method>-seed<seed>.ckpt
        embeddings/      <method>-seed<seed>.{csv,f32,json}
        reports/         metrics, summary, robustness and plot series
    <out>/run_log.csv    every metric of every run, appended
"""

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..core.config import Config
from ..core.csv_exporter import CSVExporter
from ..core.errors import ConfigError
from ..core.logger import get_logger
from ..models.schemas import RunConfig
from ..utils.hashing import config_hash


logger = get_logger(__name__)

RUN_LOG_FIELDS = ["run_id", "method", "dataset", "probe", "seed", "metric", "value", "config_hash"]


class RunDirectory:
    """Paths and metadata of one pipeline run."""

    def __init__(self, root: Union[str, Path], config: Dict[str, Any], run_config: RunConfig, hash_: str):
        self.root = Path(root)
        self.config = config
        self.run_config = run_config
        self.config_hash = hash_

    @property
    def run_id(self) -> str:
        return self.root.name

    @classmethod
    def create(cls, out: Union[str, Path], config: Config, run_config: RunConfig) -> "RunDirectory":
        """Make a fresh ``<timestamp>-<hash>`` directory and write ``config.json``."""
        resolved = {"config": config.to_dict(), "run": run_config.model_dump(mode="json")}
        hash_ = config_hash(resolved)
        stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
        root = Path(out) / f"{stamp}-{hash_}"
        suffix = 1
        while root.exists():
            root = Path(out) / f"{stamp}-{hash_}-{suffix}"
            suffix += 1
        for sub in ("data", "ckpts", "embeddings", "reports"):
            (root / sub).mkdir(parents=True, exist_ok=True)
        (root / "config.json").write_text(
            json.dumps({"config_hash": hash_, **resolved}, indent=2, sort_keys=True), encoding="utf-8"
        )
        logger.info(f"Created run directory {root}")
        return cls(root, resolved["config"], run_config, hash_)

    @classmethod
    def open(cls, root: Union[str, Path]) -> "RunDirectory":
        """Reopen an existing run, e.g. to resume it."""
        root = Path(root)
        path = root / "config.json"
        if not path.exists():
            raise ConfigError(f"{root} is not a run directory (no config.json)")
        payload = json.loads(path.read_text(encoding="utf-8"))
        return cls(root, payload["config"], RunConfig.model_validate(payload["run"]), payload["config_hash"])

    def load_config(self) -> Config:
        return Config(config_path=None, data=self.config)

    @property
    def data_path(self) -> Path:
        """Prepared copy of the dataset, named after the source file."""
        stem = Path(self.run_config.dataset).name.split(".")[0]
        return self.root / "data" / f"{stem}.jsonl"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    @property
    def embeddings_dir(self) -> Path:
        return self.root / "embeddings"

    def ckpt_path(self, method: str, seed: int) -> Path:
        return self.root / "ckpts" / f"{method}-seed{seed}.ckpt"

    def append_run_log(self, report, out: Optional[Union[str, Path]] = None) -> Path:
        """Append every metric of ``report`` to the shared ``run_log.csv`` next to the run."""
        exporter = CSVExporter(output_dir=str(out or self.root.parent))
        rows = [r.model_dump() for r in report.records]
        return exporter.export(rows, "run_log.csv", fieldnames=RUN_LOG_FIELDS, append=True)
