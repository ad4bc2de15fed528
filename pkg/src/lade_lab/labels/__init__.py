"""Label space: distributions, count profiles and post-compensation."""

from lade_lab.labels.distribution import (
    LabelDistribution,
    importance_weights,
    pc_adjust_logits,
    pc_softmax_probs,
)
from lade_lab.labels.profiles import (
    CountProfile,
    counts_to_distribution,
    make_longtail,
    make_shifted_test,
    make_uniform,
)

__all__ = [
    "CountProfile",
    "LabelDistribution",
    "counts_to_distribution",
    "importance_weights",
    "make_longtail",
    "make_shifted_test",
    "make_uniform",
    "pc_adjust_logits",
    "pc_softmax_probs",
]
