"""Pydantic models for configuration and persisted records in lade-lab.

This module defines:
- Enums: ProfileKind, ShiftDirection, LossKind, ScheduleKind, InferenceMode,
  PriorMode, SweepAxis, RunStage
- Configuration: LadeConfig, LossSpec, OptimizerSpec, TrainConfig and the
  sections of ExperimentConfig
- Records: EpochRecord, EvaluationRow, CalibrationReport, ResultRecord,
  Checkpoint and friends

All models use Pydantic v2 for validation and serialization. Configuration
models forbid unknown keys so that typos in sweep files fail loudly.
"""

from enum import Enum
from typing import Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# Enums
# ============================================================================


class ProfileKind(str, Enum):
    """Shape of a per-class count profile."""

    LONGTAIL = "longtail"
    FORWARD = "forward"
    BACKWARD = "backward"
    UNIFORM = "uniform"


class ShiftDirection(str, Enum):
    """Direction of a shifted test set relative to the training profile.

    - FORWARD: head-aligned with the source, approaches it as mu grows
    - BACKWARD: flipped, diverges from the source as mu grows
    """

    FORWARD = "forward"
    BACKWARD = "backward"


class LossKind(str, Enum):
    """Training objective.

    - CE: plain softmax cross-entropy
    - LADE_CE: prior-weighted cross-entropy only (the Balanced Softmax case)
    - LADE: LADE_CE plus alpha times the disentangling regularizer
    """

    CE = "ce"
    LADE_CE = "lade_ce"
    LADE = "lade"


class ScheduleKind(str, Enum):
    """Learning-rate schedule."""

    CONSTANT = "constant"
    COSINE = "cosine"
    STEP = "step"


class InferenceMode(str, Enum):
    """How test-time probabilities are produced from a trained model's logits.

    - SOFTMAX: softmax of the raw logits
    - PC_SOFTMAX: post-compensation from the training prior to the target prior
    - PRIOR: target prior injected into disentangled logits
    - UNIFORM_PC: post-compensation from the uniform prior to the target prior
    """

    SOFTMAX = "softmax"
    PC_SOFTMAX = "pc_softmax"
    PRIOR = "prior"
    UNIFORM_PC = "uniform_pc"


class PriorMode(str, Enum):
    """Which target label distribution evaluation assumes."""

    TRUE_SHIFT = "true_shift"
    UNIFORM = "uniform"
    CUSTOM = "custom"


class SweepAxis(str, Enum):
    """Hyperparameter axis swept by the sweep command."""

    LAMBDA = "lambda"
    ALPHA = "alpha"
    MU = "mu"
    ABLATION = "ablation"


class RunStage(str, Enum):
    """Progress of an experiment directory.

    States: CONFIGURED → DATA_READY → TRAINED → EVALUATED
    """

    CONFIGURED = "configured"
    DATA_READY = "data_ready"
    TRAINED = "trained"
    EVALUATED = "evaluated"


# ============================================================================
# Loss and Training Configuration
# ============================================================================


class LadeConfig(BaseModel):
    """Hyperparameters of the LADE objective.

    Attributes:
        lambda_: Strength of the squared log-partition penalty (config key ``lambda``)
        alpha: Weight of the regularizer in the combined loss
        class_weights: Per-class regularizer weights; None means "use p_s"
    """

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    lambda_: float = Field(default=0.1, ge=0.0, alias="lambda")
    alpha: float = Field(default=0.1, ge=0.0)
    class_weights: list[float] | None = None

    @field_validator("class_weights")
    @classmethod
    def _nonnegative_weights(cls, value: list[float] | None) -> list[float] | None:
        if value is not None and any(w < 0 for w in value):
            raise ValueError("class_weights must be nonnegative")
        return value


class LossSpec(LadeConfig):
    """Loss selection together with its LADE hyperparameters."""

    kind: LossKind = LossKind.LADE


class OptimizerSpec(BaseModel):
    """SGD settings and learning-rate schedule.

    Attributes:
        epochs: Number of passes over the training set
        batch_size: Samples per SGD step (last partial batch is kept)
        lr: Initial learning rate
        momentum: Momentum coefficient in [0, 1)
        weight_decay: L2 coefficient added to the gradient
        schedule: constant, cosine (to zero) or step
        milestones: Epochs at which the step schedule decays
        gamma: Step-schedule decay factor
    """

    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(default=60, ge=1)
    batch_size: int = Field(default=128, ge=1)
    lr: float = Field(default=0.05, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    weight_decay: float = Field(default=5e-4, ge=0.0)
    schedule: ScheduleKind = ScheduleKind.COSINE
    milestones: list[int] = Field(default_factory=list)
    gamma: float = Field(default=0.1, gt=0.0, le=1.0)


class TrainConfig(OptimizerSpec):
    """Everything the training loop needs: optimizer, seed and loss."""

    seed: int = 0
    loss: LossSpec = Field(default_factory=LossSpec)


# ============================================================================
# Experiment Configuration
# ============================================================================


class WorldSpec(BaseModel):
    """Gaussian-mixture world parameters (config keys ``world.*``)."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    num_classes: int = Field(default=10, ge=2, alias="C")
    dim: int = Field(default=8, ge=1)
    spread: float = Field(default=4.0, gt=0.0)
    stddev: float = Field(default=1.0, gt=0.0)
    seed: int = 0


class TrainProfileSpec(BaseModel):
    """Long-tailed training profile (config keys ``train_profile.*``)."""

    model_config = ConfigDict(extra="forbid")

    n_max: int = Field(default=500, ge=1)
    mu: float = Field(default=100.0, ge=1.0)

    @model_validator(mode="after")
    def _tail_present(self) -> Self:
        if self.n_max < self.mu:
            raise ValueError(f"n_max ({self.n_max}) must be >= mu ({self.mu})")
        return self


class ShiftGridSpec(BaseModel):
    """Shifted test-set grid plus the held-out validation set (config keys ``test.*``).

    The validation set is an independent balanced draw of ``val_per_class``
    samples per class; sweeps select hyperparameters on it, never on the
    test pool.
    """

    model_config = ConfigDict(extra="forbid")

    directions: list[ShiftDirection] = Field(
        default_factory=lambda: [ShiftDirection.FORWARD, ShiftDirection.BACKWARD]
    )
    mus: list[float] = Field(default_factory=lambda: [2.0, 10.0, 50.0])
    n_per_class: int = Field(default=50, ge=1)
    val_per_class: int = Field(default=20, ge=1)

    @model_validator(mode="after")
    def _mus_fit_pool(self) -> Self:
        for mu in self.mus:
            if mu < 1 or mu > self.n_per_class:
                raise ValueError(f"shift mu {mu} must lie in [1, n_per_class={self.n_per_class}]")
        return self


class ModelSpec(BaseModel):
    """MLP hidden widths (config keys ``model.*``)."""

    model_config = ConfigDict(extra="forbid")

    hidden: list[int] = Field(default_factory=lambda: [64])

    @field_validator("hidden")
    @classmethod
    def _positive_widths(cls, value: list[int]) -> list[int]:
        if any(width < 1 for width in value):
            raise ValueError("hidden widths must be positive")
        return value


class EvalSpec(BaseModel):
    """Evaluation prior and binning (config keys ``eval.*``)."""

    model_config = ConfigDict(extra="forbid")

    prior: PriorMode = PriorMode.TRUE_SHIFT
    custom: list[float] | None = None
    bins: int = Field(default=20, ge=1)


class SweepSpec(BaseModel):
    """Grid values per sweep axis (config keys ``sweep.*``)."""

    model_config = ConfigDict(extra="forbid")

    lambdas: list[float] = Field(default_factory=lambda: [0.0, 0.1])
    alphas: list[float] = Field(default_factory=lambda: [0.0, 0.1])
    mus: list[float] = Field(default_factory=lambda: [10.0, 50.0, 100.0])


class RunSpec(BaseModel):
    """Run seed and output directory (config keys ``run.*``)."""

    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    out: str = "runs/default"


class ExperimentConfig(BaseModel):
    """Complete description of one experiment.

    Every source of randomness is derived from ``world.seed`` or ``run.seed``.
    """

    model_config = ConfigDict(extra="forbid")

    world: WorldSpec = Field(default_factory=WorldSpec)
    train_profile: TrainProfileSpec = Field(default_factory=TrainProfileSpec)
    test: ShiftGridSpec = Field(default_factory=ShiftGridSpec)
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: OptimizerSpec = Field(default_factory=OptimizerSpec)
    loss: LossSpec = Field(default_factory=LossSpec)
    eval: EvalSpec = Field(default_factory=EvalSpec)
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    run: RunSpec = Field(default_factory=RunSpec)

    @model_validator(mode="after")
    def _custom_prior_shape(self) -> Self:
        custom = self.eval.custom
        if custom is not None and len(custom) != self.world.num_classes:
            raise ValueError(
                f"eval.custom has {len(custom)} entries, expected C={self.world.num_classes}"
            )
        return self


# ============================================================================
# Training Records
# ============================================================================


class EpochRecord(BaseModel):
    """One row of the training history."""

    epoch: int = Field(ge=1)
    lr: float = Field(ge=0.0)
    mean_loss: float
    train_accuracy: float = Field(ge=0.0, le=1.0)


class Checkpoint(BaseModel):
    """Serialized MLP parameters.

    Floats are written shortest-round-trip, so loading reproduces the
    parameters bit for bit.
    """

    format_version: int = 1
    dims: list[int]
    weights: list[list[list[float]]]
    biases: list[list[float]]


# ============================================================================
# Evaluation Records
# ============================================================================


class GroupAccuracy(BaseModel):
    """Top-1 accuracy per Many/Medium/Few class group; None marks an empty group."""

    many: float | None = None
    medium: float | None = None
    few: float | None = None
    all: float


class ReliabilityBin(BaseModel):
    """One confidence bin ((bin-1)/M, bin/M] of a reliability diagram."""

    bin: int = Field(ge=1)
    count: int = Field(ge=0)
    acc: float
    conf: float


class CalibrationReport(BaseModel):
    """Reliability bins plus the scalar calibration metrics."""

    n_bins: int = Field(ge=1)
    bins: list[ReliabilityBin]
    ece: float = Field(ge=0.0, le=1.0)
    classwise_ece: float = Field(ge=0.0)
    brier: float = Field(ge=0.0, le=2.0)
    nll: float = Field(ge=0.0)


class LogitStats(BaseModel):
    """Mean/variance of one class's logit over positive and negative samples."""

    class_index: int = Field(ge=0)
    pos_mean: float | None = None
    pos_var: float | None = None
    neg_mean: float | None = None
    neg_var: float | None = None


class EvaluationRow(BaseModel):
    """Accuracy of one inference method on one test set."""

    method: str
    shift_direction: str
    shift_mu: float
    top1: float
    many: float | None = None
    medium: float | None = None
    few: float | None = None
    oracle_tv: float | None = None


class CalibrationScalars(BaseModel):
    """Calibration metrics of one inference method on the balanced test set."""

    method: str
    accuracy: float
    ece: float
    classwise_ece: float
    brier: float
    nll: float


class ResultRecord(BaseModel):
    """Persisted outcome of one evaluation.

    Every number is reproducible from the config (identified by its hash)
    and the seed.
    """

    config_hash: str
    version: str
    seed: int
    loss: LossKind
    wall_clock_seconds: float = Field(ge=0.0)
    final_loss: float | None = None
    val_top1: float | None = None
    rows: list[EvaluationRow] = Field(default_factory=list)
    calibration: list[CalibrationScalars] = Field(default_factory=list)


class SweepRow(BaseModel):
    """One grid point of a hyperparameter sweep."""

    model_config = ConfigDict(populate_by_name=True)

    axis: SweepAxis
    value: str
    lambda_: float = Field(alias="lambda")
    alpha: float
    mu: float
    config_hash: str
    final_loss: float
    val_top1: float | None = None
    top1: float
    many: float | None = None
    medium: float | None = None
    few: float | None = None
