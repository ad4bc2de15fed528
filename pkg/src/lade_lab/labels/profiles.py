"""Per-class count profiles: long-tailed training sets and shifted test sets.

Classes are indexed so that class 0 is the most frequent in the training
profile. Fractional counts are rounded half-up and clamped to at least 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from lade_lab.errors import ParameterError
from lade_lab.labels.distribution import LabelDistribution
from lade_lab.schemas import ProfileKind, ShiftDirection

PROFILE_COLUMNS = ["class_index", "count"]


@dataclass(frozen=True)
class CountProfile:
    """Number of samples per class.

    Attributes:
        counts: Per-class counts n_j
        mu: Nominal imbalance ratio the profile was built with
        kind: longtail, forward, backward or uniform

    Invariants:
        longtail and forward counts are non-increasing in class index,
        backward counts are non-decreasing, uniform counts are equal.
    """

    counts: tuple[int, ...]
    mu: float
    kind: ProfileKind

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) < 2:
            raise ParameterError(f"a profile needs C >= 2 classes, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise ParameterError("counts must be nonnegative")
        pairs = list(zip(counts, counts[1:]))
        if self.kind in (ProfileKind.LONGTAIL, ProfileKind.FORWARD) and any(a < b for a, b in pairs):
            raise ParameterError(f"{self.kind.value} counts must be non-increasing")
        if self.kind == ProfileKind.BACKWARD and any(a > b for a, b in pairs):
            raise ParameterError("backward counts must be non-decreasing")
        if self.kind == ProfileKind.UNIFORM and len(set(counts)) != 1:
            raise ParameterError("uniform counts must all be equal")

    @property
    def num_classes(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def realized_ratio(self) -> float:
        """max(counts) / min(nonzero counts) after rounding."""
        nonzero = [c for c in self.counts if c > 0]
        if not nonzero:
            return math.nan
        return max(nonzero) / min(nonzero)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)


def _round_half_up(value: float) -> int:
    return max(1, math.floor(value + 0.5))


def _check_profile_args(num_classes: int, n: int, mu: float, name: str) -> None:
    if num_classes < 2:
        raise ParameterError(f"C must be >= 2, got {num_classes}")
    if mu < 1:
        raise ParameterError(f"imbalance ratio mu must be >= 1, got {mu}")
    if n < mu:
        raise ParameterError(f"{name} ({n}) must be >= mu ({mu}) so every class keeps a sample")


def make_longtail(num_classes: int, n_max: int, mu: float) -> CountProfile:
    """Exponentially decaying training profile with head count n_max.

    counts[j] = round(n_max * mu ** (-j / (C - 1))) for j = 0..C-1, so the
    endpoint ratio is exactly mu (up to rounding of the tail).

    Raises:
        ParameterError: If C < 2, mu < 1 or n_max < mu
    """
    _check_profile_args(num_classes, n_max, mu, "n_max")
    counts = tuple(
        _round_half_up(n_max * mu ** (-j / (num_classes - 1))) for j in range(num_classes)
    )
    return CountProfile(counts=counts, mu=mu, kind=ProfileKind.LONGTAIL)


def make_shifted_test(
    num_classes: int, n_per_class: int, mu: float, direction: ShiftDirection
) -> CountProfile:
    """Forward or Backward shifted test profile.

    With 1-based class index j:
        forward:  n_j = round(N * mu ** (-(j - 1) / C))
        backward: n_j = round(N * mu ** (-(C - j) / C))

    Forward keeps the head classes of the training profile frequent; backward
    flips the order so the tail classes dominate.

    Raises:
        ParameterError: If C < 2, mu < 1 or n_per_class < mu
    """
    _check_profile_args(num_classes, n_per_class, mu, "n_per_class")
    c = num_classes
    if direction == ShiftDirection.FORWARD:
        exponents = [(j - 1) / c for j in range(1, c + 1)]
        kind = ProfileKind.FORWARD
    else:
        exponents = [(c - j) / c for j in range(1, c + 1)]
        kind = ProfileKind.BACKWARD
    counts = tuple(_round_half_up(n_per_class * mu ** (-e)) for e in exponents)
    return CountProfile(counts=counts, mu=mu, kind=kind)


def make_uniform(num_classes: int, n_per_class: int) -> CountProfile:
    """Balanced profile with n_per_class samples per class."""
    _check_profile_args(num_classes, n_per_class, 1.0, "n_per_class")
    return CountProfile(counts=(n_per_class,) * num_classes, mu=1.0, kind=ProfileKind.UNIFORM)


def counts_to_distribution(profile: CountProfile) -> LabelDistribution:
    """Empirical label distribution counts[j] / sum(counts).

    Raises:
        ParameterError: If all counts are zero
    """
    total = profile.total
    if total <= 0:
        raise ParameterError("cannot normalize an all-zero count profile")
    return LabelDistribution(np.asarray(profile.counts, dtype=np.float64) / total)


def profile_to_frame(profile: CountProfile) -> pd.DataFrame:
    """Tabular form with header class_index,count."""
    return pd.DataFrame(
        {"class_index": np.arange(profile.num_classes), "count": profile.as_array()},
        columns=PROFILE_COLUMNS,
    )


def profile_from_frame(frame: pd.DataFrame, mu: float, kind: ProfileKind) -> CountProfile:
    """Rebuild a profile from its table; rows must be ordered by class index."""
    if list(frame.columns) != PROFILE_COLUMNS:
        raise ParameterError(f"profile table needs columns {PROFILE_COLUMNS}, got {list(frame.columns)}")
    if not np.array_equal(frame["class_index"].to_numpy(), np.arange(len(frame))):
        raise ParameterError("profile table rows must be ordered by class_index from 0")
    return CountProfile(counts=tuple(int(c) for c in frame["count"]), mu=mu, kind=kind)
