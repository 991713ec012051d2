"""
Data models for the event-sequence workbench.
Using Pydantic for validation and serialization.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


PAD_CODE = 0
RARE_CODE = 1
FIRST_CATEGORY_CODE = 2

TargetKind = Literal["binary", "multiclass", "regression", "none"]
Method = Literal["supervised", "contrastive", "generative", "naive", "mlem"]
METHODS: Tuple[str, ...] = ("supervised", "contrastive", "generative", "naive", "mlem")
SplitTag = Literal["train", "val", "test"]


class CategoricalFeature(BaseModel):
    """Categorical sub-event with its code space (0 = padding, 1 = RARE)."""

    name: str
    vocab_size: int = Field(..., ge=2, description="Codes in [0, vocab_size), padding and RARE included")
    embed_dim: int = Field(32, gt=0)
    vocabulary: Optional[List[str]] = Field(
        None, description="Labels of codes 2.. in order; unknown labels load as RARE"
    )

    @model_validator(mode="after")
    def check_vocabulary(self) -> "CategoricalFeature":
        if self.vocabulary is not None and len(self.vocabulary) != self.vocab_size - FIRST_CATEGORY_CODE:
            raise ValueError(
                f"vocabulary of '{self.name}' has {len(self.vocabulary)} labels, "
                f"expected {self.vocab_size - FIRST_CATEGORY_CODE}"
            )
        return self

    def encode(self, value: Any) -> int:
        """Map a raw label or integer code to a code of this feature."""
        if isinstance(value, bool):
            raise ValueError(f"invalid code {value!r} for '{self.name}'")
        if isinstance(value, int):
            return value
        if self.vocabulary is None:
            raise ValueError(f"'{self.name}' has no vocabulary for label {value!r}")
        try:
            return self.vocabulary.index(str(value)) + FIRST_CATEGORY_CODE
        except ValueError:
            return RARE_CODE


class NumericFeature(BaseModel):
    """Real-valued sub-event."""

    name: str


class FeatureSchema(BaseModel):
    """Declares the categorical and numeric features of a dataset."""

    categorical: List[CategoricalFeature] = Field(default_factory=list)
    numeric: List[NumericFeature] = Field(default_factory=list)
    time_unit: str = "unit"
    target_kind: TargetKind = "none"
    n_classes: Optional[int] = Field(None, ge=2)

    @model_validator(mode="after")
    def check_schema(self) -> "FeatureSchema":
        names = self.feature_names
        if len(names) != len(set(names)):
            raise ValueError(f"feature names must be unique: {names}")
        if "dt" in names:
            raise ValueError("'dt' is reserved for the time-delta channel")
        if self.target_kind == "multiclass" and self.n_classes is None:
            raise ValueError("multiclass target requires n_classes")
        if self.target_kind == "binary":
            self.n_classes = 2
        return self

    @property
    def feature_names(self) -> List[str]:
        return [f.name for f in self.categorical] + [f.name for f in self.numeric]

    @property
    def categorical_names(self) -> List[str]:
        return [f.name for f in self.categorical]

    @property
    def numeric_names(self) -> List[str]:
        return [f.name for f in self.numeric]

    def get_categorical(self, name: str) -> CategoricalFeature:
        for feature in self.categorical:
            if feature.name == name:
                return feature
        raise KeyError(name)

    def fingerprint(self) -> Dict[str, Any]:
        """Shape-relevant description used to compare schemas across checkpoints."""
        return {
            "categorical": [(f.name, f.vocab_size, f.embed_dim) for f in self.categorical],
            "numeric": self.numeric_names,
        }


class EventSequence(BaseModel):
    """Time-ordered events with per-event feature values and an optional target."""

    model_config = ConfigDict(frozen=False)

    id: str
    times: List[float]
    cat_values: Dict[str, List[int]] = Field(default_factory=dict)
    num_values: Dict[str, List[float]] = Field(default_factory=dict)
    target: Optional[float] = None

    @field_validator('id')
    @classmethod
    def validate_id(cls, v: str) -> str:
        """Reject empty or blank ids; the id is otherwise kept as given."""
        if not v or not v.strip():
            raise ValueError("sequence id cannot be empty")
        return v

    @model_validator(mode="after")
    def check_events(self) -> "EventSequence":
        n = len(self.times)
        if n < 1:
            raise ValueError("sequence must contain at least one event")
        for a, b in zip(self.times, self.times[1:]):
            if b < a:
                raise ValueError("timestamps are not ascending")
        for name, column in list(self.cat_values.items()) + list(self.num_values.items()):
            if len(column) != n:
                raise ValueError(f"column '{name}' has {len(column)} values, expected {n}")
        return self

    def __len__(self) -> int:
        return len(self.times)

    def select(self, indices: List[int], **update: Any) -> "EventSequence":
        """Copy restricted to the events at ``indices`` (no re-validation)."""
        fields = {
            "id": self.id,
            "times": [self.times[i] for i in indices],
            "cat_values": {k: [v[i] for i in indices] for k, v in self.cat_values.items()},
            "num_values": {k: [v[i] for i in indices] for k, v in self.num_values.items()},
            "target": self.target,
        }
        fields.update(update)
        return EventSequence.model_construct(**fields)


class HawkesParams(BaseModel):
    """Univariate Hawkes process with exponential kernel."""

    mu: float = Field(10.0, gt=0)
    alpha: float = Field(0.2, ge=0)
    beta: float = Field(1.0, gt=0)
    horizon: float = Field(7.0, gt=0)

    @model_validator(mode="after")
    def check_subcritical(self) -> "HawkesParams":
        if self.alpha / self.beta >= 1.0:
            raise ValueError(f"supercritical Hawkes parameters: alpha/beta = {self.alpha / self.beta:.3f} >= 1")
        return self

    @property
    def stationary_rate(self) -> float:
        return self.mu / (1.0 - self.alpha / self.beta)


class PendulumParams(BaseModel):
    """Damped pendulum; theta in radians, omega in radians per second."""

    b: float = Field(0.5, ge=0, description="Damping factor")
    m: float = Field(1.0, gt=0, description="Mass (kg)")
    g: float = Field(9.81, gt=0, description="Gravity (m/s^2)")
    L: float = Field(1.0, gt=0, description="Length (m)")
    theta0: float = 0.0
    omega0: float = 0.0


class EncoderConfig(BaseModel):
    """GRU encoder and projector sizes."""

    hidden_size: int = Field(512, gt=0)
    feature_embed_dim: int = Field(32, gt=0)
    num_layers: int = Field(1, gt=0)
    projector_dim: int = Field(256, gt=0)

    @classmethod
    def from_config(cls, config) -> "EncoderConfig":
        section = dict(config.get_section('model').get('encoder') or {})
        projector = config.get_section('model').get('projector') or {}
        if 'output_dim' in projector:
            section['projector_dim'] = projector['output_dim']
        return cls(**section)


class DecoderConfig(BaseModel):
    """Transformer decoder used by the generative objectives."""

    layers: int = Field(3, gt=0)
    heads: int = Field(2, gt=0)
    model_dim: int = Field(128, gt=0)
    ff_dim: int = Field(256, gt=0)
    dropout: float = Field(0.0, ge=0, lt=1)
    positional: Literal["sinusoidal", "none"] = "sinusoidal"
    layer_norm: bool = True

    @model_validator(mode="after")
    def check_heads(self) -> "DecoderConfig":
        if self.model_dim % self.heads != 0:
            raise ValueError(f"model_dim {self.model_dim} not divisible by heads {self.heads}")
        return self

    @classmethod
    def from_config(cls, config) -> "DecoderConfig":
        return cls(**(config.get_section('model').get('decoder') or {}))


class TrainConfig(BaseModel):
    """Optimisation settings shared by every pre-training strategy."""

    epochs: Optional[int] = Field(None, gt=0, description="None -> 100 below 100K sequences, else 40")
    lr: float = Field(1e-3, gt=0)
    weight_decay: float = Field(3e-3, ge=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    batch_size: int = Field(128, gt=0)
    alpha: float = Field(1.0, ge=0)
    beta: float = Field(10.0, ge=0)
    margin: float = Field(0.5, gt=0)
    n_views: int = Field(2, ge=2)
    view_range: Tuple[float, float] = (0.4, 0.8)
    grad_clip: Optional[float] = Field(1.0, gt=0)
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2])
    deterministic: bool = True

    @field_validator('seeds')
    @classmethod
    def validate_seeds(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("seeds cannot be empty")
        return v

    @field_validator('view_range')
    @classmethod
    def validate_view_range(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        lo, hi = v
        if not 0 < lo <= hi <= 1:
            raise ValueError(f"view_range must satisfy 0 < lo <= hi <= 1, got {v}")
        return v

    def resolve_epochs(self, n_train: int) -> int:
        """100 epochs below 100 000 training sequences, 40 above, unless set explicitly."""
        if self.epochs is not None:
            return self.epochs
        return 100 if n_train < 100_000 else 40

    @classmethod
    def from_config(cls, config, **overrides: Any) -> "TrainConfig":
        values = dict(config.get_section('training'))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class RunConfig(BaseModel):
    """Resolved settings of one CLI pipeline run."""

    dataset: str
    schema_path: Optional[str] = None
    methods: List[str] = Field(default_factory=lambda: ["mlem"])
    train: TrainConfig = Field(default_factory=TrainConfig)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    decoder: DecoderConfig = Field(default_factory=DecoderConfig)
    output_dir: str = "runs"
    deterministic: bool = True
    jobs: int = Field(1, ge=1)
    probes: List[str] = Field(default_factory=lambda: ["linear", "nonlinear", "tpp"])
    finetune: bool = False
    robustness: bool = True
    geometry: bool = True
    baseline: bool = True

    @field_validator('methods')
    @classmethod
    def validate_methods(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("at least one method is required")
        unknown = [m for m in v if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        return v

    @field_validator('probes')
    @classmethod
    def validate_probes(cls, v: List[str]) -> List[str]:
        unknown = [p for p in v if p not in ("linear", "nonlinear", "tpp")]
        if unknown:
            raise ValueError(f"unknown probes {unknown}")
        return v

    @property
    def seeds(self) -> List[int]:
        return list(self.train.seeds)


class MetricRecord(BaseModel):
    """One scalar result of one (method, dataset, probe, seed) cell."""

    run_id: str = ""
    method: str
    dataset: str
    probe: str
    seed: int
    metric: str
    value: float
    config_hash: str = ""


class RobustnessRow(BaseModel):
    """Relative change of the linear probe under one perturbation level."""

    method: str
    dataset: str = ""
    perturbation: Literal["none", "shuffle", "dropout"]
    p: float = 0.0
    metric: str
    mean_pct: float
    std_pct: float
    n_seeds: int
    config_hash: str = ""


class RobustnessSample(BaseModel):
    """Linear-probe metric of one checkpoint on one perturbed copy of the data."""

    method: str
    dataset: str = ""
    perturbation: Literal["none", "shuffle", "dropout"]
    p: float = 0.0
    metric: str
    seed: int
    perturb_seed: int = 0
    baseline: float
    value: float
    pct_change: float
    config_hash: str = ""
