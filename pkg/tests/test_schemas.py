"""Tests for Pydantic schemas."""

import pytest
from pydantic import ValidationError

from lade_lab.schemas import (
    CalibrationReport,
    ExperimentConfig,
    LadeConfig,
    LossKind,
    LossSpec,
    ModelSpec,
    OptimizerSpec,
    ReliabilityBin,
    RunStage,
    ShiftGridSpec,
    SweepAxis,
    SweepRow,
    TrainProfileSpec,
    WorldSpec,
)


def test_enum_values() -> None:
    """Test enum members serialize to their config spellings."""
    assert LossKind.LADE_CE.value == "lade_ce"
    assert SweepAxis.LAMBDA.value == "lambda"
    assert [s.value for s in RunStage] == ["configured", "data_ready", "trained", "evaluated"]


def test_lade_config_lambda_alias() -> None:
    """Test lambda is accepted by alias and by field name."""
    assert LadeConfig.model_validate({"lambda": 0.3}).lambda_ == 0.3
    assert LadeConfig(lambda_=0.2).lambda_ == 0.2
    assert LadeConfig().model_dump(by_alias=True)["lambda"] == 0.1


def test_lade_config_rejects_negative_values() -> None:
    """Test negative lambda, alpha and class weights are rejected."""
    with pytest.raises(ValidationError):
        LadeConfig(lambda_=-0.1)
    with pytest.raises(ValidationError):
        LadeConfig(alpha=-1.0)
    with pytest.raises(ValidationError):
        LadeConfig(class_weights=[1.0, -0.5])


def test_loss_spec_forbids_unknown_keys() -> None:
    """Test typos in loss keys fail."""
    with pytest.raises(ValidationError):
        LossSpec.model_validate({"kind": "lade", "alhpa": 0.1})


def test_optimizer_spec_bounds() -> None:
    """Test momentum must lie in [0, 1) and lr must be positive."""
    with pytest.raises(ValidationError):
        OptimizerSpec(momentum=1.0)
    with pytest.raises(ValidationError):
        OptimizerSpec(lr=0.0)


def test_world_spec_c_alias() -> None:
    """Test the number of classes is written as C."""
    assert WorldSpec.model_validate({"C": 4}).num_classes == 4
    with pytest.raises(ValidationError):
        WorldSpec.model_validate({"C": 1})


def test_train_profile_needs_tail() -> None:
    """Test n_max must be at least mu."""
    with pytest.raises(ValidationError):
        TrainProfileSpec(n_max=10, mu=100.0)


def test_shift_grid_mus_fit_pool() -> None:
    """Test shift mu must lie in [1, n_per_class]."""
    with pytest.raises(ValidationError):
        ShiftGridSpec(mus=[60.0], n_per_class=50)
    with pytest.raises(ValidationError):
        ShiftGridSpec(mus=[0.5])


def test_model_spec_widths_positive() -> None:
    """Test hidden widths must be positive; no hidden layer is allowed."""
    assert ModelSpec(hidden=[]).hidden == []
    with pytest.raises(ValidationError):
        ModelSpec(hidden=[8, 0])


def test_experiment_config_custom_prior_length() -> None:
    """Test eval.custom must match the class count."""
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"world": {"C": 3}, "eval": {"custom": [0.5, 0.5]}})


def test_experiment_config_forbids_unknown_sections() -> None:
    """Test an unknown section fails."""
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate({"plot": {"dpi": 100}})


def test_calibration_report_ranges() -> None:
    """Test ece must lie in [0, 1]."""
    bins = [ReliabilityBin(bin=1, count=2, acc=0.5, conf=0.5)]
    report = CalibrationReport(n_bins=1, bins=bins, ece=0.0, classwise_ece=0.0, brier=0.5, nll=0.7)
    assert report.bins[0].count == 2
    with pytest.raises(ValidationError):
        CalibrationReport(n_bins=1, bins=bins, ece=1.5, classwise_ece=0.0, brier=0.5, nll=0.7)


def test_sweep_row_serializes_lambda_alias() -> None:
    """Test sweep rows dump lambda under its config name."""
    row = SweepRow(
        axis=SweepAxis.LAMBDA, value="0.1", lambda_=0.1, alpha=0.1, mu=100.0,
        config_hash="abcd", final_loss=0.3, top1=0.8,
    )
    assert row.model_dump(by_alias=True)["lambda"] == 0.1
