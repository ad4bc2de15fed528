"""Gaussian-mixture worlds with closed-form Bayes posteriors.

Every class-conditional p(x|y) is an isotropic normal with a shared standard
deviation, identical under every label distribution. That makes the exact
posterior under any prior available as an oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import logsumexp
from scipy.stats import norm

from lade_lab.errors import ConstructionError, DimensionError, ParameterError
from lade_lab.labels.distribution import LabelDistribution

logger = logging.getLogger(__name__)

MAX_RESTARTS = 50
MAX_DRAWS_PER_CLASS = 200


@dataclass(frozen=True, eq=False)
class MixtureWorld:
    """A synthetic world with known class-conditional densities.

    Attributes:
        means: C x dim array of class means
        stddev: Shared isotropic standard deviation
        seed: Seed the means were placed with; also keys sample generation
    """

    means: np.ndarray
    stddev: float
    seed: int

    def __post_init__(self) -> None:
        means = np.array(self.means, dtype=np.float64)
        if means.ndim != 2 or means.shape[0] < 2:
            raise ParameterError(f"means must be C x dim with C >= 2, got shape {means.shape}")
        if not np.all(np.isfinite(means)):
            raise ParameterError("means must be finite")
        if not self.stddev > 0:
            raise ParameterError(f"stddev must be positive, got {self.stddev}")
        means.flags.writeable = False
        object.__setattr__(self, "means", means)

    @property
    def num_classes(self) -> int:
        return int(self.means.shape[0])

    @property
    def dim(self) -> int:
        return int(self.means.shape[1])

    def min_mean_distance(self) -> float:
        diffs = self.means[:, None, :] - self.means[None, :, :]
        dists = np.sqrt((diffs**2).sum(axis=-1))
        return float(dists[np.triu_indices(self.num_classes, k=1)].min())

    def __repr__(self) -> str:
        """String representation."""
        return f"MixtureWorld(C={self.num_classes}, dim={self.dim}, stddev={self.stddev}, seed={self.seed})"


def make_world(
    num_classes: int, dim: int, spread: float, stddev: float, seed: int
) -> MixtureWorld:
    """Place C class means on the sphere of radius ``spread``.

    Means are drawn uniformly on the sphere and rejected when closer than
    spread / 2 to an accepted mean; a stuck placement restarts from a fresh
    sub-seed. In one dimension the only layout is {+spread, -spread}.

    Raises:
        ParameterError: If an argument is out of range
        ConstructionError: If no valid placement is found within the retry budget
    """
    if num_classes < 2 or dim < 1 or not spread > 0 or not stddev > 0:
        raise ParameterError(
            f"invalid world parameters: C={num_classes}, dim={dim}, spread={spread}, stddev={stddev}"
        )
    if seed < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")

    if dim == 1:
        if num_classes != 2:
            raise ConstructionError(f"cannot place {num_classes} separated means in one dimension")
        return MixtureWorld(means=np.array([[spread], [-spread]]), stddev=stddev, seed=seed)

    min_distance = spread / 2.0
    for restart in range(MAX_RESTARTS):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, restart])))
        placed: list[np.ndarray] = []
        for _ in range(num_classes):
            for _ in range(MAX_DRAWS_PER_CLASS):
                direction = rng.standard_normal(dim)
                candidate = spread * direction / np.linalg.norm(direction)
                if all(np.linalg.norm(candidate - m) >= min_distance for m in placed):
                    placed.append(candidate)
                    break
            else:
                break
        if len(placed) == num_classes:
            logger.info(
                "Placed %d means in %d dims (spread=%g) after %d restart(s)",
                num_classes, dim, spread, restart,
            )
            return MixtureWorld(means=np.stack(placed), stddev=stddev, seed=seed)

    raise ConstructionError(
        f"could not place {num_classes} means with pairwise distance >= {min_distance} "
        f"in {dim} dims after {MAX_RESTARTS} restarts"
    )


def _as_matrix(world: MixtureWorld, x: ArrayLike) -> tuple[np.ndarray, bool]:
    points = np.asarray(x, dtype=np.float64)
    single = points.ndim == 1
    points = np.atleast_2d(points)
    if points.shape[1] != world.dim:
        raise DimensionError(f"feature shape {points.shape} does not match world dim {world.dim}")
    return points, single


def log_likelihoods(world: MixtureWorld, x: ArrayLike) -> np.ndarray:
    """Class-conditional log densities log p(x|c), shape N x C (or C for one point)."""
    points, single = _as_matrix(world, x)
    logp = norm.logpdf(points[:, None, :], loc=world.means[None, :, :], scale=world.stddev).sum(axis=-1)
    return logp[0] if single else logp


def log_posterior(world: MixtureWorld, x: ArrayLike, prior: LabelDistribution) -> np.ndarray:
    """log p(y|x) under ``prior``, normalized in log space."""
    if prior.num_classes != world.num_classes:
        raise DimensionError(f"prior has {prior.num_classes} classes, world has {world.num_classes}")
    joint = log_likelihoods(world, x) + prior.log()
    return joint - logsumexp(joint, axis=-1, keepdims=True)


def bayes_posterior(world: MixtureWorld, x: ArrayLike, prior: LabelDistribution) -> np.ndarray:
    """Exact posterior prior(y) p(x|y) / sum_c prior(c) p(x|c)."""
    return np.exp(log_posterior(world, x, prior))


def true_logit_target(world: MixtureWorld, x: ArrayLike, y: int | ArrayLike) -> float | np.ndarray:
    """Ideal disentangled logit log(p(x|y) / p_u(x)) with p_u(x) the uniform mixture.

    Equals log C + log p_u(y|x); approaches log C deep inside class y's region.
    """
    uniform = LabelDistribution.uniform(world.num_classes)
    logpost = log_posterior(world, x, uniform)
    if logpost.ndim == 1:
        return float(math.log(world.num_classes) + logpost[int(np.asarray(y))])
    labels = np.asarray(y, dtype=np.int64)
    return math.log(world.num_classes) + logpost[np.arange(len(labels)), labels]
