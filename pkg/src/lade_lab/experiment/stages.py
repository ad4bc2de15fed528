"""Experiment directory layout and stage tracking.

Stages: CONFIGURED → DATA_READY → TRAINED → EVALUATED

The stage of a directory is derived from the artifacts present on disk, so
separate CLI invocations agree on it without any extra bookkeeping.
"""

from dataclasses import dataclass
from pathlib import Path

from lade_lab.errors import ArtifactError
from lade_lab.schemas import ExperimentConfig, RunStage, ShiftDirection


def shift_label(direction: ShiftDirection | str, mu: float) -> str:
    """File-name fragment for a shift point, e.g. ``backward_50``."""
    name = direction.value if isinstance(direction, ShiftDirection) else direction
    return f"{name}_{mu:g}"


@dataclass(frozen=True)
class ExperimentLayout:
    """Paths of every artifact inside one experiment directory."""

    root: Path

    @property
    def config_file(self) -> Path:
        return self.root / "config.toml"

    @property
    def data_dir(self) -> Path:
        return self.root / "data"

    @property
    def train_data(self) -> Path:
        return self.data_dir / "train.csv"

    @property
    def train_profile(self) -> Path:
        return self.data_dir / "train_profile.csv"

    @property
    def uniform_test(self) -> Path:
        return self.data_dir / "test_uniform.csv"

    @property
    def val_data(self) -> Path:
        return self.data_dir / "val.csv"

    def test_data(self, direction: ShiftDirection, mu: float) -> Path:
        return self.data_dir / f"test_{shift_label(direction, mu)}.csv"

    def test_profile(self, direction: ShiftDirection, mu: float) -> Path:
        return self.data_dir / f"profile_{shift_label(direction, mu)}.csv"

    @property
    def checkpoint(self) -> Path:
        return self.root / "model.ckpt"

    @property
    def history(self) -> Path:
        return self.root / "history.csv"

    @property
    def evaluation(self) -> Path:
        return self.root / "evaluation.csv"

    @property
    def record(self) -> Path:
        return self.root / "record.json"

    @property
    def calibration_dir(self) -> Path:
        return self.root / "calibration"

    def sweep_table(self, axis: str) -> Path:
        return self.root / f"sweep_{axis}.csv"

    def sweep_point(self, axis: str, digest: str) -> Path:
        return self.root / "sweep" / f"{axis}-{digest}"

    def required_for(self, stage: RunStage, config: ExperimentConfig) -> list[Path]:
        """Artifacts whose presence defines a stage."""
        if stage == RunStage.CONFIGURED:
            return []
        if stage == RunStage.DATA_READY:
            paths = [self.train_data, self.train_profile, self.uniform_test, self.val_data]
            for direction in config.test.directions:
                for mu in config.test.mus:
                    paths.extend((self.test_data(direction, mu), self.test_profile(direction, mu)))
            return paths
        if stage == RunStage.TRAINED:
            return [*self.required_for(RunStage.DATA_READY, config), self.checkpoint, self.history]
        return [*self.required_for(RunStage.TRAINED, config), self.evaluation, self.record]


class StageTracker:
    """Validates that an experiment directory is ready for a command.

    Command preconditions:
    - gen-data: any stage
    - train: DATA_READY or later
    - evaluate / calibrate: TRAINED or later

    Example:
        >>> tracker = StageTracker(ExperimentLayout(Path("runs/demo")), config)
        >>> tracker.current_stage
        RunStage.CONFIGURED
        >>> tracker.require(RunStage.DATA_READY)
        Traceback (most recent call last):
        ArtifactError: ...
    """

    _ORDER = [RunStage.CONFIGURED, RunStage.DATA_READY, RunStage.TRAINED, RunStage.EVALUATED]

    def __init__(self, layout: ExperimentLayout, config: ExperimentConfig) -> None:
        self.layout = layout
        self.config = config

    def missing(self, stage: RunStage) -> list[Path]:
        return [p for p in self.layout.required_for(stage, self.config) if not p.exists()]

    @property
    def current_stage(self) -> RunStage:
        """Furthest stage whose artifacts are all present."""
        reached = RunStage.CONFIGURED
        for stage in self._ORDER[1:]:
            if self.missing(stage):
                break
            reached = stage
        return reached

    def has_reached(self, stage: RunStage) -> bool:
        return not self.missing(stage)

    def require(self, stage: RunStage) -> None:
        """Raise ArtifactError naming the first missing artifact of a stage."""
        missing = self.missing(stage)
        if missing:
            raise ArtifactError(
                f"experiment in {self.layout.root} is not {stage.value}: missing {missing[0]}"
                + (f" (and {len(missing) - 1} more)" if len(missing) > 1 else "")
            )

    def can_train(self) -> bool:
        return self.has_reached(RunStage.DATA_READY)

    def can_evaluate(self) -> bool:
        return self.has_reached(RunStage.TRAINED)

    def __repr__(self) -> str:
        """String representation."""
        return f"StageTracker(root={self.layout.root}, stage={self.current_stage.value})"
