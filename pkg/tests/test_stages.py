"""Tests for experiment layout and stage tracking."""

import tempfile
from collections.abc import Iterator
from pathlib import Path

import pytest

from lade_lab.errors import ArtifactError
from lade_lab.experiment.config import load_config
from lade_lab.experiment.stages import ExperimentLayout, StageTracker, shift_label
from lade_lab.schemas import ExperimentConfig, RunStage, ShiftDirection


@pytest.fixture
def config() -> ExperimentConfig:
    """Grid of one direction and two shift strengths."""
    return load_config(overrides=["test.directions=[\"backward\"]", "test.mus=[2.0, 10.0]"])


@pytest.fixture
def layout() -> Iterator[ExperimentLayout]:
    """Layout rooted in a temporary directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield ExperimentLayout(Path(tmpdir))


def _touch(paths: list[Path]) -> None:
    for path in paths:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("# header\n", encoding="utf-8")


def test_shift_label_formats_mu() -> None:
    """Test labels drop trailing zeros of mu."""
    assert shift_label(ShiftDirection.BACKWARD, 50.0) == "backward_50"
    assert shift_label("forward", 2.5) == "forward_2.5"


def test_layout_paths(layout: ExperimentLayout) -> None:
    """Test artifact locations inside the experiment directory."""
    assert layout.train_data == layout.root / "data" / "train.csv"
    assert layout.val_data == layout.root / "data" / "val.csv"
    assert layout.test_data(ShiftDirection.FORWARD, 10.0).name == "test_forward_10.csv"
    assert layout.test_profile(ShiftDirection.FORWARD, 10.0).name == "profile_forward_10.csv"
    assert layout.sweep_table("alpha").name == "sweep_alpha.csv"
    assert layout.sweep_point("alpha", "abcd") == layout.root / "sweep" / "alpha-abcd"


def test_data_ready_requires_whole_grid(layout: ExperimentLayout, config: ExperimentConfig) -> None:
    """Test DATA_READY lists train, validation, pool and every shift point."""
    required = layout.required_for(RunStage.DATA_READY, config)
    assert len(required) == 4 + 2 * 2
    assert layout.val_data in required
    assert layout.test_data(ShiftDirection.BACKWARD, 10.0) in required


def test_initial_stage_is_configured(layout: ExperimentLayout, config: ExperimentConfig) -> None:
    """Test an empty directory is only CONFIGURED."""
    tracker = StageTracker(layout, config)
    assert tracker.current_stage == RunStage.CONFIGURED
    assert not tracker.can_train()
    assert not tracker.can_evaluate()


def test_stage_advances_with_artifacts(layout: ExperimentLayout, config: ExperimentConfig) -> None:
    """Test stages follow the artifacts on disk."""
    tracker = StageTracker(layout, config)

    _touch(layout.required_for(RunStage.DATA_READY, config))
    assert tracker.current_stage == RunStage.DATA_READY
    assert tracker.can_train()

    _touch([layout.checkpoint, layout.history])
    assert tracker.current_stage == RunStage.TRAINED
    assert tracker.can_evaluate()

    _touch([layout.evaluation, layout.record])
    assert tracker.current_stage == RunStage.EVALUATED


def test_partial_data_is_not_ready(layout: ExperimentLayout, config: ExperimentConfig) -> None:
    """Test one missing shift set keeps the directory CONFIGURED."""
    required = layout.required_for(RunStage.DATA_READY, config)
    _touch(required[:-1])
    tracker = StageTracker(layout, config)
    assert tracker.current_stage == RunStage.CONFIGURED
    assert tracker.missing(RunStage.DATA_READY) == required[-1:]


def test_require_names_first_missing_artifact(layout: ExperimentLayout, config: ExperimentConfig) -> None:
    """Test require raises ArtifactError pointing at the missing file."""
    _touch(layout.required_for(RunStage.DATA_READY, config))
    tracker = StageTracker(layout, config)
    tracker.require(RunStage.DATA_READY)
    with pytest.raises(ArtifactError, match="model.ckpt"):
        tracker.require(RunStage.TRAINED)


def test_tracker_repr(layout: ExperimentLayout, config: ExperimentConfig) -> None:
    """Test repr includes the current stage."""
    assert "stage=configured" in repr(StageTracker(layout, config))
