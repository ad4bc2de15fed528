"""Synthetic Gaussian-mixture data and Bayes-posterior oracles."""

from lade_lab.data.sampling import Dataset, sample, subsample
from lade_lab.data.world import (
    MixtureWorld,
    bayes_posterior,
    log_likelihoods,
    log_posterior,
    make_world,
    true_logit_target,
)

__all__ = [
    "Dataset",
    "MixtureWorld",
    "bayes_posterior",
    "log_likelihoods",
    "log_posterior",
    "make_world",
    "sample",
    "subsample",
    "true_logit_target",
]
