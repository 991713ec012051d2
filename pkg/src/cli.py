"""
Command-line interface of the workbench.

    workbench [--config PATH] [--seed N] [--jobs N] [--deterministic] [--out DIR] COMMAND ...
"""

from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional

import typer
from rich.console import Console
from rich.table import Table

from .core.checkpoint import ModelCheckpoint
from .core.config import Config, set_config
from .core.errors import WorkbenchError
from .core.logger import configure_from_section, get_logger
from .data.dataset import Dataset, load_dataset, load_schema, save_dataset
from .data.splitting import assign_split_tags
from .evaluation.embeddings import extract_embeddings
from .evaluation.geometry import anisotropy, geometry_correlation, intrinsic_dimension
from .evaluation.probes import linear_probe, nonlinear_probe, tpp_probe
from .evaluation.report import MetricsReport
from .evaluation.robustness import robustness_report
from .models.schemas import METHODS, EncoderConfig, DecoderConfig, TrainConfig
from .pipeline.rundir import RunDirectory
from .pipeline.stages import build_run_config, preprocess_dataset, run_pipeline
from .synthgen.generator import PendulumDatasetSettings, generate_pendulum_dataset
from .trainers import finetune as finetune_checkpoint, train_method


app = typer.Typer(
    help="Self-supervised pre-training workbench for event sequences.",
    no_args_is_help=True,
    add_completion=False,
)
console = Console()
logger = get_logger(__name__)


@dataclass
class CLIState:
    """Global options shared by every command."""

    config: Config
    seed: Optional[int]
    jobs: int
    deterministic: Optional[bool]
    out: Path

    def train_config(self, **overrides) -> TrainConfig:
        return TrainConfig.from_config(self.config, deterministic=self.deterministic, **overrides)

    def run_seed(self, override: Optional[int] = None) -> int:
        if override is not None:
            return override
        return 0 if self.seed is None else self.seed


@contextmanager
def cli_errors() -> Iterator[None]:
    """Report expected failures on the console and exit with status 1."""
    try:
        yield
    except (WorkbenchError, ValueError, FileNotFoundError, OSError) as e:
        console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(code=1)


def _state(ctx: typer.Context) -> CLIState:
    return ctx.obj


def _load(dataset: Path, schema: Optional[Path] = None) -> Dataset:
    return load_dataset(dataset, load_schema(schema) if schema else None)


def _split_list(value: str, cast=str) -> List:
    return [cast(v.strip()) for v in value.split(",") if v.strip()]


@app.callback()
def main(
    ctx: typer.Context,
    config: Path = typer.Option(Path("config/config.yaml"), "--config", "-c", help="YAML configuration file"),
    seed: Optional[int] = typer.Option(
        None, "--seed", help="Seed for single-run commands (default 0); restricts the pipeline to one seed"
    ),
    jobs: int = typer.Option(1, "--jobs", "-j", min=1, help="Worker processes"),
    deterministic: Optional[bool] = typer.Option(
        None, "--deterministic/--no-deterministic", help="Force deterministic single-threaded kernels"
    ),
    out: Optional[Path] = typer.Option(None, "--out", help="Output root directory (default output.directory)"),
):
    """Load the configuration and set up logging."""
    cfg = set_config(Config(str(config)))
    configure_from_section(cfg.logging_config)
    ctx.obj = CLIState(cfg, seed, jobs, deterministic, out or Path(cfg.get("output.directory", "runs")))


@app.command("gen-data")
def gen_data(
    ctx: typer.Context,
    n: int = typer.Option(10000, "--n", min=1, help="Number of sequences"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Overrides the global seed"),
    out: Path = typer.Option(Path("data/pendulum.jsonl"), "--out", "-o", help="JSON-lines file to write"),
    horizon: Optional[float] = typer.Option(None, "--horizon", help="Observation window length"),
):
    """Generate the synthetic pendulum dataset."""
    state = _state(ctx)
    with cli_errors():
        settings = PendulumDatasetSettings.from_config(state.config, horizon)
        dataset = generate_pendulum_dataset(n, state.run_seed(seed), settings, state.jobs)
        save_dataset(dataset, out)
    lengths = dataset.lengths()
    table = Table(title=f"Generated {out}")
    table.add_column("sequences", justify="right")
    table.add_column("mean length", justify="right")
    table.add_column("min", justify="right")
    table.add_column("max", justify="right")
    table.add_row(str(len(dataset)), f"{lengths.mean():.2f}", str(lengths.min()), str(lengths.max()))
    console.print(table)


@app.command()
def preprocess(
    ctx: typer.Context,
    dataset: Path = typer.Argument(..., exists=True, dir_okay=False, help="Raw dataset (JSON-lines or CSV)"),
    output: Path = typer.Option(..., "--output", "-o", help="Prepared JSON-lines file"),
    schema: Optional[Path] = typer.Option(None, "--schema", help="Schema file, default <stem>.schema.json"),
):
    """Aggregate, consolidate rare categories, truncate, normalise time and tag splits."""
    state = _state(ctx)
    with cli_errors():
        data = preprocess_dataset(_load(dataset, schema), state.config.data)
        data = assign_split_tags(data, state.config.get("data.split_ratios", (0.8, 0.1, 0.1)),
                                 state.config.get("data.split_seed", 0))
        save_dataset(data, output)
    console.print(f"Wrote {len(data)} sequences to {output}")


@app.command()
def pretrain(
    ctx: typer.Context,
    dataset: Path = typer.Argument(..., exists=True, dir_okay=False),
    method: str = typer.Option("mlem", "--method", "-m", help=f"One of {['random', *METHODS]}"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Checkpoint path"),
    contrastive: Optional[Path] = typer.Option(None, "--contrastive", help="Frozen contrastive checkpoint for mlem"),
    epochs: Optional[int] = typer.Option(None, "--epochs", min=1),
    seed: Optional[int] = typer.Option(None, "--seed"),
):
    """Pre-train one method on the train split (or the whole file when it has no tags)."""
    state = _state(ctx)
    seed = state.run_seed(seed)
    output = output or state.out / "ckpts" / f"{method}-seed{seed}.ckpt"
    with cli_errors():
        data = _load(dataset)
        train = data.subset("train") if data.split_tags is not None else data
        train_config = state.train_config(epochs=epochs)
        encoder, decoder = EncoderConfig.from_config(state.config), DecoderConfig.from_config(state.config)
        frozen = None
        if method == "mlem":
            if contrastive is not None:
                frozen = ModelCheckpoint.load(contrastive)
            else:
                frozen = train_method("contrastive", train, None, train_config, encoder, decoder, seed)
                frozen.save(output.with_name(f"contrastive-seed{seed}.ckpt"))
        ckpt = train_method(method, train, None, train_config, encoder, decoder, seed, contrastive_checkpoint=frozen)
        ckpt.save(output)
    final = ckpt.history.get("epoch/loss", [float("nan")])[-1]
    console.print(f"Saved {method} checkpoint to {output} (final epoch loss {final:.5f})")


@app.command()
def finetune(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., exists=True, dir_okay=False),
    dataset: Path = typer.Argument(..., exists=True, dir_okay=False),
    task: Optional[str] = typer.Option(None, "--task", help="regression, binary or multiclass"),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
    seed: Optional[int] = typer.Option(None, "--seed"),
):
    """Fine-tune a pre-trained encoder with a fresh head and report the test metric."""
    state = _state(ctx)
    with cli_errors():
        data = _load(dataset)
        if data.split_tags is None:
            data = assign_split_tags(data, state.config.get("data.split_ratios", (0.8, 0.1, 0.1)),
                                     state.config.get("data.split_seed", 0))
        result = finetune_checkpoint(ModelCheckpoint.load(checkpoint), data.subset("train"), data.subset("test"),
                                     state.train_config(), state.run_seed(seed), task)
        if output is not None:
            result.checkpoint.save(output)
    console.print(f"{result.metric}: {result.value:.6f}")


@app.command()
def probe(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., exists=True, dir_okay=False),
    dataset: Path = typer.Argument(..., exists=True, dir_okay=False),
    kind: str = typer.Option("linear", "--kind", help="linear, nonlinear, tpp or a comma list"),
    export: Optional[Path] = typer.Option(None, "--export", help="Directory for the embedding export"),
):
    """Probe frozen embeddings of a checkpoint."""
    state = _state(ctx)
    evaluation = state.config.evaluation
    reg = evaluation.get("probe_regularization", 1e-3)
    fraction = evaluation.get("probe_test_fraction", 0.2)
    boosting = evaluation.get("boosting", {})
    table = Table(title=f"Probes of {checkpoint.name}")
    for column in ("probe", "metric", "value"):
        table.add_column(column)
    with cli_errors():
        ckpt, data = ModelCheckpoint.load(checkpoint), _load(dataset)
        emb = extract_embeddings(ckpt, data, evaluation.get("batch_size", 256))
        if export is not None:
            emb.save(export, f"{ckpt.method}-seed{ckpt.seed}")
        task = data.schema.target_kind
        for name in _split_list(kind):
            if name == "linear":
                result = linear_probe(emb, task, reg, fraction, state.run_seed())
            elif name == "nonlinear":
                result = nonlinear_probe(emb, task, boosting.get("max_depth", 6), boosting.get("max_iter", 200),
                                         boosting.get("learning_rate", 0.1), fraction, state.run_seed())
            elif name == "tpp":
                result = tpp_probe(ckpt, data, reg, fraction, state.run_seed())
            else:
                raise ValueError(f"unknown probe '{name}'")
            table.add_row(name, result.metric, f"{result.value:.6f}")
    console.print(table)


@app.command()
def analyze(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., exists=True, dir_okay=False),
    dataset: Path = typer.Argument(..., exists=True, dir_okay=False),
    center: bool = typer.Option(True, "--center/--no-center", help="Mean-center before the singular values"),
):
    """Anisotropy and intrinsic dimension of a checkpoint's embeddings."""
    with cli_errors():
        emb = extract_embeddings(ModelCheckpoint.load(checkpoint), _load(dataset))
        ratio = anisotropy(emb, center=center)
        dim = intrinsic_dimension(emb)
    console.print(f"anisotropy: {ratio:.6f}  (isotropic: {1.0 / emb.dim:.6f})")
    console.print(f"intrinsic dimension: {dim:.3f}  (ambient: {emb.dim})")


@app.command()
def perturb(
    ctx: typer.Context,
    checkpoint: Path = typer.Argument(..., exists=True, dir_okay=False),
    dataset: Path = typer.Argument(..., exists=True, dir_okay=False),
    grid: Optional[str] = typer.Option(None, "--grid", help="Dropout probabilities, e.g. 0.1,0.3,0.5,0.7"),
    shuffle: bool = typer.Option(True, "--shuffle/--no-shuffle"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Directory for the robustness CSVs"),
):
    """Linear-probe degradation under event shuffling and dropout."""
    state = _state(ctx)
    evaluation = state.config.evaluation
    with cli_errors():
        levels = _split_list(grid, float) if grid else evaluation.get("dropout_grid", [0.1, 0.3, 0.5, 0.7])
        report = robustness_report(
            ModelCheckpoint.load(checkpoint), _load(dataset), levels,
            evaluation.get("perturbation_seeds", [0, 1, 2]), shuffle=shuffle,
            regularization=evaluation.get("probe_regularization", 1e-3),
            test_fraction=evaluation.get("probe_test_fraction", 0.2),
        )
        if output is not None:
            report.save(output)
    report.render(console, title="Robustness")


@app.command()
def pipeline(
    ctx: typer.Context,
    dataset: Optional[Path] = typer.Option(None, "--dataset", "-d", help="Dataset for a new run"),
    methods: str = typer.Option("mlem", "--methods", "--method", "-m", help="Comma list or 'all'"),
    resume: Optional[Path] = typer.Option(None, "--resume", help="Continue an existing run directory"),
    schema: Optional[Path] = typer.Option(None, "--schema"),
    probes: str = typer.Option("linear,nonlinear,tpp", "--probes"),
    finetune: bool = typer.Option(False, "--finetune/--no-finetune"),
    robustness: bool = typer.Option(True, "--robustness/--no-robustness"),
    baseline: bool = typer.Option(True, "--baseline/--no-baseline", help="Also evaluate a random encoder"),
):
    """Preprocess, pre-train every method and seed, evaluate and report."""
    state = _state(ctx)
    with cli_errors():
        if resume is not None:
            run = RunDirectory.open(resume)
        else:
            if dataset is None:
                raise ValueError("either --dataset or --resume is required")
            chosen = list(METHODS) if methods.strip() == "all" else _split_list(methods)
            run_config = build_run_config(
                state.config, str(dataset), chosen, str(state.out),
                seeds=[state.seed] if state.seed is not None else None,
                deterministic=state.deterministic, jobs=state.jobs,
                schema_path=str(schema) if schema else None,
                probes=_split_list(probes), finetune=finetune, robustness=robustness, baseline=baseline,
            )
            run = RunDirectory.create(state.out, state.config, run_config)
        report = run_pipeline(run, state.jobs)
    report.render(console, title=f"Run {run.run_id}")
    console.print(f"Artifacts in {run.root}")


@app.command()
def report(
    ctx: typer.Context,
    run_dir: Path = typer.Argument(..., exists=True, file_okay=False, help="Run directory or its reports/ folder"),
    correlate: bool = typer.Option(False, "--correlate", help="Correlate geometry with linear-probe quality"),
):
    """Print the summary of a finished run."""
    with cli_errors():
        reports = run_dir / "reports" if (run_dir / "reports").is_dir() else run_dir
        loaded = MetricsReport.load(reports)
        loaded.render(console, title=f"Report {run_dir.name}")
        if correlate:
            result = geometry_correlation(loaded.geometry_cells())
            table = Table(title="Geometry vs. linear-probe quality")
            for column in ("geometry", "pearson", "spearman"):
                table.add_column(column)
            for name, values in result.items():
                table.add_row(name, f"{values['pearson']:.3f}", f"{values['spearman']:.3f}")
            console.print(table)


if __name__ == "__main__":
    app()
