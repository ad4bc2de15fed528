"""SGD with momentum and weight decay, plus learning-rate schedules."""

import math
from collections.abc import Sequence

import numpy as np

from lade_lab.errors import DimensionError
from lade_lab.schemas import OptimizerSpec, ScheduleKind


def learning_rate(spec: OptimizerSpec, epoch: int) -> float:
    """Learning rate for a 0-based epoch index.

    - constant: lr
    - cosine: lr * (1 + cos(pi * epoch / epochs)) / 2, decaying towards 0
    - step: lr * gamma ** (number of milestones <= epoch)
    """
    if spec.schedule == ScheduleKind.COSINE:
        return spec.lr * 0.5 * (1.0 + math.cos(math.pi * epoch / spec.epochs))
    if spec.schedule == ScheduleKind.STEP:
        passed = sum(1 for milestone in spec.milestones if epoch >= milestone)
        return spec.lr * spec.gamma**passed
    return spec.lr


class SGD:
    """Momentum SGD with L2 weight decay folded into the velocity.

    Update per parameter w with gradient g:
        v <- momentum * v + g + weight_decay * w
        w <- w - lr * v

    Steps return fresh arrays; inputs are never modified in place.
    """

    def __init__(self, momentum: float, weight_decay: float) -> None:
        self.momentum = momentum
        self.weight_decay = weight_decay
        self._velocity: list[np.ndarray] | None = None

    def step(
        self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray], lr: float
    ) -> list[np.ndarray]:
        if len(params) != len(grads):
            raise DimensionError(f"{len(params)} parameters but {len(grads)} gradients")
        if self._velocity is None:
            self._velocity = [np.zeros_like(p) for p in params]

        updated: list[np.ndarray] = []
        velocity: list[np.ndarray] = []
        for w, g, v in zip(params, grads, self._velocity, strict=True):
            v_next = self.momentum * v + g + self.weight_decay * w
            velocity.append(v_next)
            updated.append(w - lr * v_next)
        self._velocity = velocity
        return updated

    def __repr__(self) -> str:
        """String representation."""
        return f"SGD(momentum={self.momentum}, weight_decay={self.weight_decay})"
