"""Sampling labelled datasets from a mixture world.

Each sample draws from its own Philox generator keyed by
(world seed, sample seed, class, index), so the output does not depend on
iteration order and can be regenerated one sample at a time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from lade_lab.data.world import MixtureWorld
from lade_lab.errors import DimensionError, ParameterError
from lade_lab.labels.profiles import CountProfile

logger = logging.getLogger(__name__)

RNG_NAME = "philox4x64-seedseq-v1"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labelled samples.

    Attributes:
        features: N x dim array
        labels: Length-N integer labels in [0, C)
        class_counts: Per-class counts N_c, consistent with labels
    """

    features: np.ndarray
    labels: np.ndarray
    class_counts: tuple[int, ...]

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        counts = tuple(int(c) for c in self.class_counts)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise DimensionError(f"features {features.shape} and labels {labels.shape} disagree")
        if labels.size and (labels.min() < 0 or labels.max() >= len(counts)):
            raise ParameterError(f"labels must lie in [0, {len(counts)})")
        if tuple(np.bincount(labels, minlength=len(counts)).tolist()) != counts:
            raise ParameterError("class_counts are inconsistent with labels")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_counts", counts)

    @property
    def num_samples(self) -> int:
        return int(self.labels.size)

    @property
    def num_classes(self) -> int:
        return len(self.class_counts)

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def __repr__(self) -> str:
        """String representation."""
        return f"Dataset(N={self.num_samples}, C={self.num_classes}, dim={self.dim})"


def _sample_rng(world_seed: int, seed: int, class_index: int, sample_index: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=[world_seed, seed], spawn_key=(class_index, sample_index))
    return np.random.Generator(np.random.Philox(sequence))


def sample(world: MixtureWorld, profile: CountProfile, seed: int) -> Dataset:
    """Draw exactly profile.counts[c] samples from each class-conditional.

    Raises:
        DimensionError: If the profile's class count differs from the world's
        ParameterError: If a class has a zero count or the seed is negative
    """
    if profile.num_classes != world.num_classes:
        raise DimensionError(f"profile has {profile.num_classes} classes, world has {world.num_classes}")
    if any(c == 0 for c in profile.counts):
        raise ParameterError("every class needs at least one sample")
    if seed < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")

    features = np.empty((profile.total, world.dim))
    labels = np.empty(profile.total, dtype=np.int64)
    row = 0
    for c, count in enumerate(profile.counts):
        for i in range(count):
            noise = _sample_rng(world.seed, seed, c, i).standard_normal(world.dim)
            features[row] = world.means[c] + world.stddev * noise
            labels[row] = c
            row += 1

    logger.debug("Sampled %d points (seed=%d, counts=%s)", profile.total, seed, profile.counts)
    return Dataset(features=features, labels=labels, class_counts=profile.counts)


def subsample(pool: Dataset, profile: CountProfile, seed: int) -> Dataset:
    """Pick profile.counts[c] samples of class c from pool without replacement.

    The choice per class is a seeded permutation prefix; the kept samples stay
    in pool order.

    Raises:
        ParameterError: If a class asks for more samples than the pool holds
    """
    if profile.num_classes != pool.num_classes:
        raise DimensionError(f"profile has {profile.num_classes} classes, pool has {pool.num_classes}")
    keep: list[np.ndarray] = []
    for c, count in enumerate(profile.counts):
        members = np.flatnonzero(pool.labels == c)
        if count > members.size:
            raise ParameterError(f"class {c} needs {count} samples, pool has {members.size}")
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(c,))))
        keep.append(members[np.sort(rng.permutation(members.size)[:count])])
    index = np.sort(np.concatenate(keep))
    return Dataset(
        features=pool.features[index],
        labels=pool.labels[index],
        class_counts=profile.counts,
    )


def dataset_to_frame(dataset: Dataset) -> pd.DataFrame:
    """Tabular form with header label,x0,...,x{dim-1}."""
    frame = pd.DataFrame(dataset.features, columns=[f"x{k}" for k in range(dataset.dim)])
    frame.insert(0, "label", dataset.labels)
    return frame


def dataset_from_frame(frame: pd.DataFrame, num_classes: int) -> Dataset:
    """Rebuild a dataset from its table."""
    if not frame.columns.size or frame.columns[0] != "label":
        raise ParameterError("dataset table must start with a 'label' column")
    labels = frame["label"].to_numpy(dtype=np.int64)
    features = frame.drop(columns="label").to_numpy(dtype=np.float64)
    counts = tuple(np.bincount(labels, minlength=num_classes).tolist())
    return Dataset(features=features, labels=labels, class_counts=counts)
