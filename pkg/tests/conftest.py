"""Shared fixtures: a tiny experiment that trains in well under a second."""

import tempfile
from collections.abc import Iterator
from pathlib import Path

import pytest

from lade_lab.experiment import load_config
from lade_lab.schemas import ExperimentConfig

TINY_OVERRIDES = (
    "world.C=3",
    "world.dim=2",
    "train_profile.n_max=40",
    "train_profile.mu=10.0",
    "test.n_per_class=20",
    "test.mus=[2.0, 10.0, 20.0]",
    "model.hidden=[8]",
    "train.epochs=3",
    "train.batch_size=16",
    "train.lr=0.05",
    "eval.bins=5",
    "sweep.alphas=[0.0, 0.1]",
    "sweep.lambdas=[0.0, 0.1]",
    "sweep.mus=[5.0, 10.0]",
)


@pytest.fixture
def tiny_overrides() -> list[str]:
    """Override strings of the tiny experiment."""
    return list(TINY_OVERRIDES)


@pytest.fixture
def tmp_root() -> Iterator[Path]:
    """Temporary experiment directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def tiny_config(tmp_root: Path) -> ExperimentConfig:
    """Three-class, two-dimensional experiment writing into tmp_root."""
    return load_config(overrides=TINY_OVERRIDES, out=tmp_root)
