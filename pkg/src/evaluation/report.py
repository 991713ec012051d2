"""
Collection, aggregation and export of evaluation results.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
from rich.console import Console
from rich.table import Table

from ..core.csv_exporter import CSVExporter
from ..core.logger import get_logger
from ..models.schemas import MetricRecord, RobustnessRow, RobustnessSample


logger = get_logger(__name__)

RECORD_KEY = ["method", "dataset", "probe", "metric", "seed"]
SAMPLE_KEY = ["method", "dataset", "perturbation", "p", "metric", "seed", "perturb_seed"]


@dataclass
class MetricsReport:
    """
    Per-seed metric records plus per-seed robustness samples.
    Aggregates are mean and sample standard deviation over seeds.
    """

    records: List[MetricRecord] = field(default_factory=list)
    samples: List[RobustnessSample] = field(default_factory=list)

    def add(self, method: str, dataset: str, probe: str, seed: int, metric: str, value: float,
            run_id: str = "", config_hash: str = "") -> MetricRecord:
        record = MetricRecord(run_id=run_id, method=method, dataset=dataset, probe=probe, seed=seed,
                              metric=metric, value=value, config_hash=config_hash)
        self.records.append(record)
        return record

    def extend(self, other: "MetricsReport") -> "MetricsReport":
        self.records.extend(other.records)
        self.samples.extend(other.samples)
        return self

    @classmethod
    def merge(cls, reports: Iterable["MetricsReport"]) -> "MetricsReport":
        """Combine reports, ordered by key so the result does not depend on completion order."""
        merged = cls()
        for report in reports:
            merged.extend(report)
        merged.records.sort(key=lambda r: tuple(getattr(r, k) for k in RECORD_KEY))
        merged.samples.sort(key=lambda s: tuple(getattr(s, k) for k in SAMPLE_KEY))
        return merged

    def tag(self, run_id: str = "", config_hash: str = "") -> "MetricsReport":
        """Stamp every value with the run id and config hash."""
        for item in [*self.records, *self.samples]:
            if run_id and hasattr(item, "run_id"):
                item.run_id = run_id
            if config_hash:
                item.config_hash = config_hash
        return self

    def frame(self) -> pd.DataFrame:
        columns = list(MetricRecord.model_fields)
        return pd.DataFrame([r.model_dump() for r in self.records], columns=columns)

    def samples_frame(self) -> pd.DataFrame:
        columns = list(RobustnessSample.model_fields)
        return pd.DataFrame([s.model_dump() for s in self.samples], columns=columns)

    def summary(self) -> pd.DataFrame:
        """Mean, sample std and seed count per (method, dataset, probe, metric)."""
        frame = self.frame()
        if frame.empty:
            return pd.DataFrame(columns=["method", "dataset", "probe", "metric", "mean", "std", "n_seeds"])
        grouped = frame.groupby(["method", "dataset", "probe", "metric"], sort=True)["value"]
        summary = grouped.agg(mean="mean", std="std", n_seeds="count").reset_index()
        summary["std"] = summary["std"].fillna(0.0)
        return summary

    def robustness_rows(self) -> List[RobustnessRow]:
        """Mean and sample std of the percentage change per perturbation level."""
        frame = self.samples_frame()
        if frame.empty:
            return []
        rows = []
        for (method, dataset, perturbation, p, metric), group in frame.groupby(
            ["method", "dataset", "perturbation", "p", "metric"], sort=True
        ):
            pct = group["pct_change"].to_numpy(dtype=np.float64)
            rows.append(RobustnessRow(
                method=method,
                dataset=dataset,
                perturbation=perturbation,
                p=float(p),
                metric=metric,
                mean_pct=float(np.mean(pct)),
                std_pct=float(np.std(pct, ddof=1)) if pct.size > 1 else 0.0,
                n_seeds=int(pct.size),
                config_hash=str(group["config_hash"].iloc[0]),
            ))
        return rows

    def dropout_series(self) -> pd.DataFrame:
        """Plot series of the dropout curve: the unperturbed point at p = 0 and every dropout level."""
        rows = [r.model_dump() for r in self.robustness_rows() if r.perturbation in ("none", "dropout")]
        columns = ["method", "dataset", "p", "metric", "mean_pct", "std_pct", "n_seeds"]
        return pd.DataFrame(rows, columns=list(RobustnessRow.model_fields))[columns].sort_values(
            ["method", "dataset", "p"]
        ).reset_index(drop=True)

    def geometry_cells(self, probe: str = "linear") -> pd.DataFrame:
        """
        One row per (method, dataset): seed-averaged ``probe`` metric next to
        the seed-averaged anisotropy and intrinsic dimension.
        """
        summary = self.summary()
        quality = summary[summary["probe"] == probe][["method", "dataset", "metric", "mean"]]
        geometry = summary[summary["probe"] == "geometry"].pivot_table(
            index=["method", "dataset"], columns="metric", values="mean"
        ).reset_index()
        cells = quality.rename(columns={"mean": "value"}).merge(geometry, on=["method", "dataset"], how="inner")
        return cells.dropna(subset=[c for c in ("anisotropy", "intrinsic_dimension") if c in cells.columns])

    def save(self, directory: Union[str, Path]) -> Dict[str, Path]:
        """Write metrics, summary, robustness and plot-series CSVs into ``directory``."""
        exporter = CSVExporter(output_dir=str(directory))
        paths = {
            "metrics": exporter.export([r.model_dump() for r in self.records], "metrics.csv",
                                       fieldnames=list(MetricRecord.model_fields)),
            "summary": exporter.export(self.summary().to_dict("records"), "summary.csv",
                                       fieldnames=["method", "dataset", "probe", "metric", "mean", "std", "n_seeds"]),
        }
        if self.samples:
            paths["robustness_samples"] = exporter.export(
                [s.model_dump() for s in self.samples], "robustness_samples.csv",
                fieldnames=list(RobustnessSample.model_fields),
            )
            paths["robustness"] = exporter.export(
                [r.model_dump() for r in self.robustness_rows()], "robustness.csv",
                fieldnames=list(RobustnessRow.model_fields),
            )
            paths["dropout_series"] = exporter.export(
                self.dropout_series().to_dict("records"), "dropout_series.csv"
            )
        return paths

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "MetricsReport":
        """Read a report back from the per-seed CSVs written by :meth:`save`."""
        directory = Path(directory)
        report = cls()
        metrics = directory / "metrics.csv"
        if not metrics.exists():
            raise FileNotFoundError(f"no metrics.csv in {directory}")
        frame = pd.read_csv(metrics, keep_default_na=False, float_precision="round_trip",
                            dtype={"run_id": str, "config_hash": str})
        report.records = [MetricRecord(**row) for row in frame.to_dict("records")]
        samples = directory / "robustness_samples.csv"
        if samples.exists():
            frame = pd.read_csv(samples, keep_default_na=False, float_precision="round_trip",
                                dtype={"dataset": str, "config_hash": str})
            report.samples = [RobustnessSample(**row) for row in frame.to_dict("records")]
        return report

    def render(self, console: Optional[Console] = None, title: str = "Results"):
        """Print the summary and robustness tables."""
        console = console or Console()
        table = Table(title=title)
        for column in ("method", "dataset", "probe", "metric", "mean ± std", "seeds"):
            table.add_column(column, justify="right" if column in ("mean ± std", "seeds") else "left")
        for row in self.summary().itertuples(index=False):
            table.add_row(row.method, row.dataset, row.probe, row.metric,
                          f"{row.mean:.4f} ± {row.std:.4f}", str(row.n_seeds))
        console.print(table)

        rows = self.robustness_rows()
        if rows:
            robust = Table(title="Robustness (% change of the linear probe)")
            for column in ("method", "dataset", "perturbation", "p", "metric", "change %", "seeds"):
                robust.add_column(column)
            for r in rows:
                robust.add_row(r.method, r.dataset, r.perturbation, f"{r.p:g}", r.metric,
                               f"{r.mean_pct:+.1f} ± {r.std_pct:.1f}", str(r.n_seeds))
            console.print(robust)
