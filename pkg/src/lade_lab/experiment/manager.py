"""Experiment lifecycle management.

Runs the commands of one experiment directory by coordinating:
- Stage tracking (which artifacts exist)
- Artifact storage (tables, checkpoint, records)
- The numeric modules (data, training, metrics)
"""

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import softmax

from lade_lab import __version__
from lade_lab.data import Dataset, MixtureWorld, bayes_posterior, make_world, sample, subsample
from lade_lab.data.sampling import RNG_NAME, dataset_from_frame, dataset_to_frame
from lade_lab.errors import ConfigError, ParameterError
from lade_lab.experiment.config import (
    config_hash,
    dump_config,
    header_line,
    sub_seed,
    train_config,
    with_values,
)
from lade_lab.experiment.stages import ExperimentLayout, StageTracker, shift_label
from lade_lab.experiment.storage import (
    ResultStore,
    read_model,
    read_table,
    write_model,
    write_table,
    write_text_atomic,
)
from lade_lab.labels import (
    CountProfile,
    LabelDistribution,
    counts_to_distribution,
    make_longtail,
    make_shifted_test,
    make_uniform,
    pc_adjust_logits,
    pc_softmax_probs,
)
from lade_lab.labels.profiles import profile_from_frame, profile_to_frame
from lade_lab.losses import infer_probs
from lade_lab.metrics import (
    avg_prob_per_class,
    avg_prob_to_frame,
    bins_to_frame,
    calibration_report,
    group_accuracy,
    logit_stats_per_class,
    logit_stats_to_frame,
    mean_total_variation,
    top1_accuracy,
)
from lade_lab.schemas import (
    CalibrationScalars,
    Checkpoint,
    EpochRecord,
    EvaluationRow,
    ExperimentConfig,
    InferenceMode,
    LossKind,
    PriorMode,
    ProfileKind,
    ResultRecord,
    RunStage,
    ShiftDirection,
    SweepAxis,
    SweepRow,
)
from lade_lab.training import (
    ModelParams,
    from_checkpoint,
    init_model,
    predict_logits,
    source_distribution,
    to_checkpoint,
    train,
)
from lade_lab.training.trainer import history_to_frame

logger = logging.getLogger(__name__)

UNIFORM_SHIFT = "uniform"
EVALUATION_COLUMNS = [
    "method", "shift_direction", "shift_mu", "top1", "many", "medium", "few", "oracle_tv",
]
CALIBRATION_COLUMNS = ["method", "accuracy", "ece", "classwise_ece", "brier", "nll"]
SWEEP_COLUMNS = [
    "axis", "value", "lambda", "alpha", "mu", "config_hash",
    "final_loss", "val_top1", "top1", "many", "medium", "few",
]


@dataclass(frozen=True)
class EvalSet:
    """One evaluation set: the balanced pool or a shifted subset of it."""

    direction: str
    mu: float
    dataset: Dataset

    @property
    def name(self) -> str:
        return UNIFORM_SHIFT if self.direction == UNIFORM_SHIFT else shift_label(self.direction, self.mu)


def method_name(loss: LossKind, mode: InferenceMode) -> str:
    """Row label combining the training loss and the inference rule, e.g. ``lade+prior``."""
    return f"{loss.value}+{mode.value}"


def primary_mode(loss: LossKind) -> InferenceMode:
    """Natural inference rule for a loss: softmax for CE, prior injection otherwise."""
    return InferenceMode.SOFTMAX if loss == LossKind.CE else InferenceMode.PRIOR


def inference_probs(
    logits: np.ndarray,
    mode: InferenceMode,
    p_s: LabelDistribution,
    p_t: LabelDistribution,
) -> np.ndarray:
    """Test-time class probabilities under one inference rule.

    - SOFTMAX: softmax(f)
    - PC_SOFTMAX: softmax(f - log p_s + log p_t)
    - PRIOR: softmax(f + log p_t)
    - UNIFORM_PC: softmax(f - log p_u + log p_t)
    """
    if mode == InferenceMode.SOFTMAX:
        return softmax(logits, axis=1)
    if mode == InferenceMode.PC_SOFTMAX:
        return pc_softmax_probs(logits, p_s, p_t)
    if mode == InferenceMode.PRIOR:
        return infer_probs(logits, p_t)
    uniform = LabelDistribution.uniform(p_t.num_classes)
    return softmax(pc_adjust_logits(logits, uniform, p_t), axis=1)


class ExperimentManager:
    """Runs gen-data, train, evaluate, calibrate and sweep for one config.

    Every random draw comes from a named sub-seed of run.seed (or from
    world.seed), so each artifact is a pure function of the config.

    Example:
        >>> manager = ExperimentManager(config)
        >>> manager.gen_data()
        >>> model, history = manager.train()
        >>> record = manager.evaluate()
    """

    def __init__(self, config: ExperimentConfig, root: Path | None = None) -> None:
        """Initialize experiment manager.

        Args:
            config: Validated experiment configuration
            root: Experiment directory (default: config.run.out)
        """
        self.config = config
        self.layout = ExperimentLayout(Path(root) if root is not None else Path(config.run.out))
        self.stages = StageTracker(self.layout, config)
        self.store = ResultStore(self.layout.root, header=self.header)
        self.digest = config_hash(config)
        self.header = header_line(self.digest)

    # ------------------------------------------------------------------
    # Shared pieces
    # ------------------------------------------------------------------

    def seed(self, name: str) -> int:
        return sub_seed(self.config.run.seed, name)

    def build_world(self) -> MixtureWorld:
        w = self.config.world
        return make_world(w.num_classes, w.dim, w.spread, w.stddev, w.seed)

    def shift_points(self) -> list[tuple[ShiftDirection, float]]:
        return [(d, mu) for d in self.config.test.directions for mu in self.config.test.mus]

    def model_dims(self) -> list[int]:
        return [self.config.world.dim, *self.config.model.hidden, self.config.world.num_classes]

    # ------------------------------------------------------------------
    # gen-data
    # ------------------------------------------------------------------

    def gen_data(self) -> list[Path]:
        """Sample the training set, the validation set, the balanced pool and every shifted test set.

        Returns:
            Paths of all written files

        Raises:
            ArtifactError: If the output directory cannot be written
        """
        c = self.config.world.num_classes
        world = self.build_world()
        layout = self.layout
        written: list[Path] = []
        data_header = f"{self.header} rng={RNG_NAME}"

        def emit_table(path: Path, frame: pd.DataFrame) -> None:
            write_table(path, frame, data_header)
            written.append(path)

        write_text_atomic(layout.config_file, self.header + "\n" + dump_config(self.config))
        written.append(layout.config_file)

        tp = self.config.train_profile
        train_profile = make_longtail(c, tp.n_max, tp.mu)
        train_set = sample(world, train_profile, self.seed("train-sample"))
        emit_table(layout.train_data, dataset_to_frame(train_set))
        emit_table(layout.train_profile, profile_to_frame(train_profile))
        if train_profile.realized_ratio != tp.mu:
            logger.info(
                "Rounded training profile has imbalance %.4g (requested %g)", train_profile.realized_ratio, tp.mu
            )

        val_set = sample(world, make_uniform(c, self.config.test.val_per_class), self.seed("val-pool"))
        emit_table(layout.val_data, dataset_to_frame(val_set))

        n_per_class = self.config.test.n_per_class
        pool = sample(world, make_uniform(c, n_per_class), self.seed("test-pool"))
        emit_table(layout.uniform_test, dataset_to_frame(pool))

        for direction, mu in self.shift_points():
            profile = make_shifted_test(c, n_per_class, mu, direction)
            shifted = subsample(pool, profile, self.seed("test-shift"))
            emit_table(layout.test_data(direction, mu), dataset_to_frame(shifted))
            emit_table(layout.test_profile(direction, mu), profile_to_frame(profile))
            if profile.realized_ratio != mu:
                logger.debug("%s_%g: rounded imbalance %.4g", direction.value, mu, profile.realized_ratio)

        logger.info(
            "Generated %d training samples, %d validation samples and %d test sets in %s",
            train_set.num_samples, val_set.num_samples, len(self.shift_points()) + 1, layout.data_dir,
        )
        return written

    def load_train(self) -> tuple[Dataset, CountProfile]:
        self.stages.require(RunStage.DATA_READY)
        c = self.config.world.num_classes
        dataset = dataset_from_frame(read_table(self.layout.train_data), c)
        profile = profile_from_frame(
            read_table(self.layout.train_profile), self.config.train_profile.mu, ProfileKind.LONGTAIL
        )
        return dataset, profile

    def load_validation(self) -> Dataset:
        """Held-out balanced set used for hyperparameter selection."""
        self.stages.require(RunStage.DATA_READY)
        return dataset_from_frame(read_table(self.layout.val_data), self.config.world.num_classes)

    def load_test_sets(self) -> list[EvalSet]:
        """Balanced pool first, then every shift point in grid order."""
        self.stages.require(RunStage.DATA_READY)
        c = self.config.world.num_classes
        sets = [
            EvalSet(UNIFORM_SHIFT, 1.0, dataset_from_frame(read_table(self.layout.uniform_test), c))
        ]
        for direction, mu in self.shift_points():
            dataset = dataset_from_frame(read_table(self.layout.test_data(direction, mu)), c)
            sets.append(EvalSet(direction.value, mu, dataset))
        return sets

    # ------------------------------------------------------------------
    # train
    # ------------------------------------------------------------------

    def train(self) -> tuple[ModelParams, list[EpochRecord]]:
        """Train from a seeded initialization and write checkpoint + history.

        Raises:
            ArtifactError: If the data files are missing
            NumericFailureError: If a step produces a non-finite loss
        """
        dataset, _ = self.load_train()
        settings = train_config(self.config)
        model = init_model(self.model_dims(), self.seed("init"))
        logger.info(
            "Training %s on %d samples with loss=%s for %d epochs",
            model, dataset.num_samples, settings.loss.kind.value, settings.epochs,
        )
        model, history = train(model, dataset, settings)
        write_model(self.layout.checkpoint, to_checkpoint(model), self.header)
        write_table(self.layout.history, history_to_frame(history), self.header)
        return model, history

    def load_model(self) -> ModelParams:
        self.stages.require(RunStage.TRAINED)
        return from_checkpoint(read_model(self.layout.checkpoint, Checkpoint))

    def final_loss(self) -> float:
        history = read_table(self.layout.history)
        return float(history["mean_loss"].iloc[-1])

    # ------------------------------------------------------------------
    # evaluate / calibrate
    # ------------------------------------------------------------------

    def target_prior(self, test: EvalSet) -> LabelDistribution:
        """p_t for a test set under eval.prior.

        Raises:
            ConfigError: If eval.prior is custom but no vector is configured
        """
        c = self.config.world.num_classes
        mode = self.config.eval.prior
        if mode == PriorMode.UNIFORM or test.direction == UNIFORM_SHIFT:
            return LabelDistribution.uniform(c)
        if mode == PriorMode.CUSTOM:
            if self.config.eval.custom is None:
                raise ConfigError("eval.prior = custom requires eval.custom (a length-C vector)")
            return LabelDistribution.from_weights(self.config.eval.custom)
        return counts_to_distribution(
            CountProfile(counts=test.dataset.class_counts, mu=test.mu, kind=ProfileKind(test.direction))
        )

    def evaluate(self) -> ResultRecord:
        """Score all four inference rules on every test set and record the result.

        Returns:
            The ResultRecord, also written to record.json and results.jsonl

        Raises:
            ArtifactError: If data or checkpoint are missing
            ConfigError: If a custom prior is required but absent
        """
        started = time.perf_counter()
        model = self.load_model()
        train_set, train_profile = self.load_train()
        p_s = source_distribution(train_set)
        world = self.build_world()
        loss = self.config.loss.kind

        rows: list[EvaluationRow] = []
        for test in self.load_test_sets():
            p_t = self.target_prior(test)
            features, labels = test.dataset.features, test.dataset.labels
            logits = predict_logits(model, features)
            oracle = bayes_posterior(world, features, p_t)
            for mode in InferenceMode:
                probs = inference_probs(logits, mode, p_s, p_t)
                groups = group_accuracy(probs, labels, train_profile)
                rows.append(
                    EvaluationRow(
                        method=method_name(loss, mode),
                        shift_direction=test.direction,
                        shift_mu=test.mu,
                        top1=groups.all,
                        many=groups.many,
                        medium=groups.medium,
                        few=groups.few,
                        oracle_tv=mean_total_variation(probs, oracle),
                    )
                )

        val_top1 = self.validation_accuracy(model, p_s)
        record = ResultRecord(
            config_hash=self.digest,
            version=__version__,
            seed=self.config.run.seed,
            loss=loss,
            wall_clock_seconds=time.perf_counter() - started,
            final_loss=self.final_loss(),
            val_top1=val_top1,
            rows=rows,
            calibration=self._calibration(model, p_s, write_tables=False),
        )
        frame = _rows_frame([r.model_dump() for r in rows], EVALUATION_COLUMNS)
        write_table(self.layout.evaluation, frame, self.header)
        write_model(self.layout.record, record, self.header)
        self.store.append(record)
        return record

    def validation_accuracy(self, model: ModelParams, p_s: LabelDistribution) -> float:
        """Top-1 of the loss's primary inference rule on the validation set (p_t uniform)."""
        val_set = self.load_validation()
        mode = primary_mode(self.config.loss.kind)
        p_u = LabelDistribution.uniform(self.config.world.num_classes)
        probs = inference_probs(predict_logits(model, val_set.features), mode, p_s, p_u)
        return top1_accuracy(probs, val_set.labels)

    def calibrate(self) -> list[CalibrationScalars]:
        """Calibration scalars and diagnostic tables on the balanced pool.

        Writes calibration_scalars.csv, reliability_<method>.csv,
        avg_prob_<method>.csv and logit_stats.csv under calibration/.
        """
        model = self.load_model()
        train_set, _ = self.load_train()
        return self._calibration(model, source_distribution(train_set), write_tables=True)

    def _calibration(
        self, model: ModelParams, p_s: LabelDistribution, write_tables: bool
    ) -> list[CalibrationScalars]:
        pool = self.load_test_sets()[0].dataset
        p_u = LabelDistribution.uniform(self.config.world.num_classes)
        logits = predict_logits(model, pool.features)
        out = self.layout.calibration_dir
        scalars = []
        for mode in InferenceMode:
            method = method_name(self.config.loss.kind, mode)
            probs = inference_probs(logits, mode, p_s, p_u)
            report = calibration_report(probs, pool.labels, self.config.eval.bins)
            scalars.append(
                CalibrationScalars(
                    method=method,
                    accuracy=float(np.mean(np.argmax(probs, axis=1) == pool.labels)),
                    ece=report.ece,
                    classwise_ece=report.classwise_ece,
                    brier=report.brier,
                    nll=report.nll,
                )
            )
            if write_tables:
                write_table(out / f"reliability_{method}.csv", bins_to_frame(report.bins), self.header)
                write_table(out / f"avg_prob_{method}.csv", avg_prob_to_frame(avg_prob_per_class(probs)), self.header)

        if write_tables:
            stats = logit_stats_per_class(logits, pool.labels)
            write_table(out / "logit_stats.csv", logit_stats_to_frame(stats), self.header)
            frame = _rows_frame([s.model_dump() for s in scalars], CALIBRATION_COLUMNS)
            write_table(out / "calibration_scalars.csv", frame, self.header)
            logger.info("Wrote calibration tables to %s", out)
        return scalars

    # ------------------------------------------------------------------
    # sweep
    # ------------------------------------------------------------------

    def sweep_variants(self, axis: SweepAxis) -> list[tuple[str, ExperimentConfig]]:
        """Grid of (label, config) points along one axis.

        The ablation axis crosses lambda in {0, loss.lambda} with
        alpha in {0, loss.alpha}.
        """
        grid = self.config.sweep
        lade = {"loss.kind": LossKind.LADE.value}
        if axis == SweepAxis.LAMBDA:
            points = [(f"{v:g}", {**lade, "loss.lambda": v}) for v in grid.lambdas]
        elif axis == SweepAxis.ALPHA:
            points = [(f"{v:g}", {**lade, "loss.alpha": v}) for v in grid.alphas]
        elif axis == SweepAxis.MU:
            points = [(f"{v:g}", {"train_profile.mu": v}) for v in grid.mus]
        else:
            points = [
                (f"lambda={lam:g},alpha={a:g}", {**lade, "loss.lambda": lam, "loss.alpha": a})
                for lam in (0.0, self.config.loss.lambda_)
                for a in (0.0, self.config.loss.alpha)
            ]
        return [(label, with_values(self.config, updates)) for label, updates in points]

    def sweep(self, axis: SweepAxis) -> list[SweepRow]:
        """Train and evaluate every grid point, skipping points already recorded.

        Each point runs in its own sub-directory named after its config hash;
        completed points are looked up in this directory's result store.
        Rows carry the validation top-1 used for selection next to the
        balanced-pool test scores.
        """
        rows: list[SweepRow] = []
        for label, variant in self.sweep_variants(axis):
            digest = config_hash(variant)
            record = self.store.get(digest)
            if record is not None:
                logger.info("Skipping %s=%s: result %s already recorded", axis.value, label, digest)
            else:
                point = ExperimentManager(variant, root=self.layout.sweep_point(axis.value, digest))
                if not point.stages.can_train():
                    point.gen_data()
                if not point.stages.can_evaluate():
                    point.train()
                record = point.evaluate()
                self.store.append(record)
            rows.append(_sweep_row(axis, label, variant, record))

        frame = _rows_frame([r.model_dump(mode="json", by_alias=True) for r in rows], SWEEP_COLUMNS)
        write_table(self.layout.sweep_table(axis.value), frame, self.header)
        return rows

    def __repr__(self) -> str:
        """String representation."""
        return f"ExperimentManager(root={self.layout.root}, config_hash={self.digest})"


def _rows_frame(rows: list[dict[str, object]], columns: list[str]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=columns)


def _sweep_row(axis: SweepAxis, label: str, config: ExperimentConfig, record: ResultRecord) -> SweepRow:
    method = method_name(config.loss.kind, primary_mode(config.loss.kind))
    row = next(
        r for r in record.rows if r.method == method and r.shift_direction == UNIFORM_SHIFT
    )
    return SweepRow(
        axis=axis,
        value=label,
        lambda_=config.loss.lambda_,
        alpha=config.loss.alpha,
        mu=config.train_profile.mu,
        config_hash=record.config_hash,
        final_loss=record.final_loss if record.final_loss is not None else float("nan"),
        val_top1=record.val_top1,
        top1=row.top1,
        many=row.many,
        medium=row.medium,
        few=row.few,
    )


def select_by_validation(rows: Sequence[SweepRow]) -> SweepRow:
    """Sweep point with the highest validation top-1; ties go to the earliest row.

    Raises:
        ParameterError: If no row carries a validation score
    """
    scored = [r for r in rows if r.val_top1 is not None]
    if not scored:
        raise ParameterError("no sweep row has a validation score")
    return max(scored, key=lambda r: r.val_top1 if r.val_top1 is not None else -1.0)
