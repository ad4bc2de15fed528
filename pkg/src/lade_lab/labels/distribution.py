"""Label distributions, importance weights and post-compensation.

A model trained under a source prior p_s(y) produces logits that carry
log p_s(y) up to a per-sample constant. Post-compensation swaps that prior
for a target prior p_t(y) by adding log p_t(y) - log p_s(y) to each logit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import softmax

from lade_lab.errors import DimensionError, DomainError, ParameterError

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class LabelDistribution:
    """A strictly positive probability vector over C >= 2 classes.

    Attributes:
        probs: Read-only length-C array summing to 1 within 1e-12

    Example:
        >>> p = LabelDistribution.from_weights([100, 10, 1])
        >>> p.num_classes
        3
    """

    probs: np.ndarray = field()

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size < 2:
            raise ParameterError(f"a label distribution needs C >= 2 classes, got shape {probs.shape}")
        if np.any(~(probs > 0)):
            raise DomainError("label distribution entries must be strictly positive")
        if abs(float(probs.sum()) - 1.0) > SUM_TOLERANCE:
            raise ParameterError(f"label distribution sums to {probs.sum()!r}, expected 1")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, num_classes: int) -> LabelDistribution:
        """The uninformative prior p_u(y) = 1/C."""
        if num_classes < 2:
            raise ParameterError(f"C must be >= 2, got {num_classes}")
        return cls(np.full(num_classes, 1.0 / num_classes))

    @classmethod
    def from_weights(cls, weights: ArrayLike) -> LabelDistribution:
        """Normalize nonnegative weights into a distribution."""
        w = np.asarray(weights, dtype=np.float64)
        total = float(w.sum())
        if not total > 0:
            raise ParameterError("weights must have a positive sum")
        return cls(w / total)

    @property
    def num_classes(self) -> int:
        return int(self.probs.size)

    def log(self) -> np.ndarray:
        return np.log(self.probs)

    def is_uniform(self) -> bool:
        return bool(np.all(self.probs == self.probs[0]))

    def __repr__(self) -> str:
        """String representation."""
        return f"LabelDistribution(C={self.num_classes}, probs={np.round(self.probs, 4).tolist()})"


def _probabilities(p: LabelDistribution | ArrayLike) -> np.ndarray:
    if isinstance(p, LabelDistribution):
        return p.probs
    probs = np.asarray(p, dtype=np.float64)
    if np.any(~(probs > 0)):
        raise DomainError("prior probabilities must be strictly positive")
    return probs


def importance_weights(p_u: LabelDistribution, p_s: LabelDistribution) -> np.ndarray:
    """Per-class weights p_u(c) / p_s(c) that reweight source samples to p_u.

    Raises:
        DimensionError: If the distributions have different class counts
    """
    if p_u.num_classes != p_s.num_classes:
        raise DimensionError(
            f"class count mismatch: {p_u.num_classes} vs {p_s.num_classes}"
        )
    return p_u.probs / p_s.probs


def pc_adjust_logits(
    logits: ArrayLike,
    p_from: LabelDistribution | ArrayLike,
    p_to: LabelDistribution | ArrayLike,
) -> np.ndarray:
    """Post-compensate logits: f - log p_from + log p_to, per class.

    Args:
        logits: N x C (or length-C) logit array
        p_from: Prior the logits are entangled with (p_s, or p_u for
            methods trained towards the uniform prior)
        p_to: Prior to inject

    Returns:
        Adjusted logits with the same shape as the input

    Raises:
        DomainError: If a probability is not strictly positive
        DimensionError: If the class counts disagree
    """
    f = np.asarray(logits, dtype=np.float64)
    source = _probabilities(p_from)
    target = _probabilities(p_to)
    if not (f.shape[-1] == source.size == target.size):
        raise DimensionError(
            f"logit shape {f.shape} does not match priors of size {source.size} and {target.size}"
        )
    return f - np.log(source) + np.log(target)


def pc_softmax_probs(
    logits: ArrayLike,
    p_s: LabelDistribution | ArrayLike,
    p_t: LabelDistribution | ArrayLike,
) -> np.ndarray:
    """Target-prior posterior estimate from a model trained under p_s.

    Equivalent to normalizing (p_t(y)/p_s(y)) * exp(f[y]) over classes, but
    computed as a max-shifted softmax of the post-compensated logits.
    """
    return softmax(pc_adjust_logits(logits, p_s, p_t), axis=-1)
