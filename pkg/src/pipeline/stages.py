"""
Pipeline stages: preprocess, pretrain, fine-tune, probe, analyze, robustness.

Seeds run as independent worker processes; each worker trains and evaluates
every method for its seed and returns a MetricsReport that the parent merges.
"""

from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from ..core.checkpoint import ModelCheckpoint
from ..core.config import Config
from ..core.errors import StageError
from ..core.logger import configure_from_section, get_logger
from ..data.dataset import Dataset, load_dataset, load_schema, save_dataset
from ..data.preprocessing import (
    aggregate_intervals,
    consolidate_rare_categories,
    normalize_time,
    truncate_recent,
)
from ..data.splitting import assign_split_tags
from ..evaluation.embeddings import EmbeddingMatrix, extract_embeddings
from ..evaluation.geometry import MIN_ID_POINTS, anisotropy, intrinsic_dimension
from ..evaluation.probes import linear_probe, nonlinear_probe, tpp_probe
from ..evaluation.report import MetricsReport
from ..evaluation.robustness import DROPOUT_GRID, robustness_report
from ..models.schemas import DecoderConfig, EncoderConfig, RunConfig, TrainConfig
from ..trainers import finetune, train_method
from ..utils.seeding import deterministic_mode
from .rundir import RunDirectory


logger = get_logger(__name__)


@contextmanager
def stage(name: str, seed: Optional[int] = None) -> Iterator[None]:
    """Wrap failures of a stage in StageError carrying its name and seed."""
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        logger.error(f"Stage '{name}' failed (seed={seed}): {e}")
        raise StageError(name, seed, e) from e


def preprocess_dataset(dataset: Dataset, data_section: Dict[str, Any]) -> Dataset:
    """
    Optional window aggregation, rare-category consolidation, truncation to the
    most recent events and time normalisation, in that order.
    """
    if data_section.get("aggregate", False):
        dataset = aggregate_intervals(dataset, data_section.get("aggregate_window", 360.0),
                                      data_section.get("missing_fill", -1.0))
    if dataset.schema.categorical:
        dataset = consolidate_rare_categories(dataset, data_section.get("rare_min_count", 500))
    if data_section.get("max_length"):
        dataset = truncate_recent(dataset, int(data_section["max_length"]))
    return normalize_time(dataset, data_section.get("time_scope", "sequence"))


def prepare_run_data(run: RunDirectory) -> Dataset:
    """Load, preprocess and split the run's dataset once; reuse it on resume."""
    if run.data_path.exists():
        logger.info(f"Reusing prepared dataset {run.data_path}")
        return load_dataset(run.data_path)
    section = run.load_config().data
    with stage("preprocess"):
        schema = load_schema(run.run_config.schema_path) if run.run_config.schema_path else None
        dataset = load_dataset(run.run_config.dataset, schema)
        dataset = preprocess_dataset(dataset, section)
        dataset = assign_split_tags(dataset, section.get("split_ratios", (0.8, 0.1, 0.1)),
                                    section.get("split_seed", 0))
        save_dataset(dataset, run.data_path)
    logger.info(f"Prepared {len(dataset)} sequences for run {run.run_id}")
    return dataset


def pretrain_seed(run: RunDirectory, dataset: Dataset, seed: int) -> Dict[str, ModelCheckpoint]:
    """
    Train (or reload) every requested method for ``seed``.

    The contrastive model MLEM aligns to is trained first, even when
    contrastive is not itself requested.
    """
    rc = run.run_config
    train, val = dataset.subset("train"), dataset.subset("val")
    train_config = rc.train.model_copy(update={"deterministic": rc.deterministic})
    order = [m for m in rc.methods if m != "contrastive"]
    if "contrastive" in rc.methods or "mlem" in rc.methods:
        order.insert(0, "contrastive")
    if rc.baseline:
        order.insert(0, "random")

    checkpoints: Dict[str, ModelCheckpoint] = {}
    for method in order:
        path = run.ckpt_path(method, seed)
        with stage(f"pretrain:{method}", seed):
            if path.exists():
                logger.info(f"Resuming from {path}")
                checkpoints[method] = ModelCheckpoint.load(path)
                continue
            ckpt = train_method(
                method, train, val if len(val) else None, train_config, rc.encoder, rc.decoder, seed,
                contrastive_checkpoint=checkpoints.get("contrastive"),
            )
            ckpt.extra["config_hash"] = run.config_hash
            ckpt.save(path)
            checkpoints[method] = ckpt
    return checkpoints


def evaluate_checkpoint(
    run: RunDirectory,
    method: str,
    ckpt: ModelCheckpoint,
    dataset: Dataset,
    seed: int,
    evaluation: Dict[str, Any],
) -> MetricsReport:
    """Probes, geometry, fine-tuning and robustness of one checkpoint."""
    rc = run.run_config
    report = MetricsReport()
    task = dataset.schema.target_kind
    regularization = evaluation.get("probe_regularization", 1e-3)
    test_fraction = evaluation.get("probe_test_fraction", 0.2)
    batch_size = evaluation.get("batch_size", 256)

    def add(probe: str, metric: str, value: float):
        report.add(method, dataset.name, probe, seed, metric, value,
                   run_id=run.run_id, config_hash=run.config_hash)

    with stage(f"embed:{method}", seed):
        emb = extract_embeddings(ckpt, dataset, batch_size)
        emb.save(run.embeddings_dir, f"{method}-seed{seed}", config_hash=run.config_hash)

    if task != "none":
        if "linear" in rc.probes:
            with stage(f"probe:{method}", seed):
                add("linear", *linear_probe(emb, task, regularization, test_fraction, seed))
        if "nonlinear" in rc.probes:
            boosting = evaluation.get("boosting", {})
            with stage(f"probe:{method}", seed):
                add("nonlinear", *nonlinear_probe(
                    emb, task, boosting.get("max_depth", 6), boosting.get("max_iter", 200),
                    boosting.get("learning_rate", 0.1), test_fraction, seed,
                ))
    else:
        logger.warning(f"{dataset.name} has no target; skipping target probes")
    if "tpp" in rc.probes:
        with stage(f"probe:{method}", seed):
            add("tpp", *tpp_probe(ckpt, dataset, regularization, test_fraction, seed, batch_size))

    if rc.geometry:
        with stage(f"analyze:{method}", seed):
            add_geometry(emb, evaluation.get("center_anisotropy", True), add)

    if rc.finetune and task != "none" and method != "random":
        with stage(f"finetune:{method}", seed):
            result = finetune(ckpt, dataset.subset("train"), dataset.subset("test"),
                              rc.train.model_copy(update={"deterministic": rc.deterministic}), seed, task)
            result.checkpoint.extra["config_hash"] = run.config_hash
            result.checkpoint.save(run.ckpt_path(f"{method}-finetuned", seed))
            add("finetune", result.metric, result.value)

    if rc.robustness and task != "none":
        with stage(f"robustness:{method}", seed):
            robust = robustness_report(
                ckpt, dataset,
                grid=evaluation.get("dropout_grid", DROPOUT_GRID),
                seeds=evaluation.get("perturbation_seeds", [0, 1, 2]),
                regularization=regularization, test_fraction=test_fraction, batch_size=batch_size,
            )
            report.extend(robust.tag(config_hash=run.config_hash))
    return report


def add_geometry(emb: EmbeddingMatrix, center: bool, add):
    """Record anisotropy and intrinsic dimension; the latter needs enough distinct points."""
    add("geometry", "anisotropy", anisotropy(emb, center=center))
    if len(emb) >= MIN_ID_POINTS:
        add("geometry", "intrinsic_dimension", intrinsic_dimension(emb))
    else:
        logger.warning(f"Only {len(emb)} embeddings; intrinsic dimension skipped")


def run_seed(run_root: str, seed: int) -> MetricsReport:
    """Worker entry point: pretrain and evaluate every method for one seed."""
    with stage("load", seed):
        run = RunDirectory.open(run_root)
        config = run.load_config()
        configure_from_section(config.logging_config)
        dataset = load_dataset(run.data_path)
    with deterministic_mode(run.run_config.deterministic):
        checkpoints = pretrain_seed(run, dataset, seed)
        report = MetricsReport()
        for method in [*(["random"] if run.run_config.baseline else []), *run.run_config.methods]:
            report.extend(evaluate_checkpoint(run, method, checkpoints[method], dataset, seed, config.evaluation))
    return report


def run_pipeline(run: RunDirectory, jobs: int = 1) -> MetricsReport:
    """
    Run every stage for every seed and write the merged reports.

    Seeds fan out over at most ``jobs`` processes; the merge is ordered by key.
    """
    prepare_run_data(run)
    seeds: List[int] = run.run_config.seeds
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(seeds))) as pool:
            futures = [pool.submit(run_seed, str(run.root), seed) for seed in seeds]
            reports = [future.result() for future in futures]
    else:
        reports = [run_seed(str(run.root), seed) for seed in seeds]

    report = MetricsReport.merge(reports)
    report.save(run.reports_dir)
    run.append_run_log(report)
    logger.info(f"Run {run.run_id} finished: {len(report.records)} metrics, {len(report.samples)} robustness samples")
    return report


def build_run_config(
    config: Config,
    dataset: str,
    methods: List[str],
    out: str,
    seeds: Optional[List[int]] = None,
    deterministic: Optional[bool] = None,
    jobs: int = 1,
    schema_path: Optional[str] = None,
    **flags: Any,
) -> RunConfig:
    """Resolve config file values and command-line overrides into a RunConfig."""
    train = TrainConfig.from_config(config, seeds=seeds, deterministic=deterministic)
    if not Path(dataset).exists():
        raise FileNotFoundError(f"dataset not found: {dataset}")
    return RunConfig(
        dataset=str(dataset),
        schema_path=schema_path,
        methods=methods,
        train=train,
        encoder=EncoderConfig.from_config(config),
        decoder=DecoderConfig.from_config(config),
        output_dir=str(out),
        deterministic=train.deterministic,
        jobs=jobs,
        **{k: v for k, v in flags.items() if v is not None},
    )
