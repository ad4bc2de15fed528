"""Multilayer perceptron classifier producing raw logits."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from lade_lab.autodiff import Tensor
from lade_lab.errors import DimensionError, ParameterError
from lade_lab.schemas import Checkpoint

CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Weights and biases of an MLP with rectifier hidden activations.

    Attributes:
        weights: One (fan_in, fan_out) matrix per layer
        biases: One length-fan_out vector per layer

    The last layer's output is the logit vector; there is no softmax inside
    the model.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        weights = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        biases = tuple(np.array(b, dtype=np.float64) for b in self.biases)
        if not weights or len(weights) != len(biases):
            raise ParameterError("need one bias per weight matrix and at least one layer")
        for k, (w, b) in enumerate(zip(weights, biases, strict=True)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise DimensionError(f"layer {k}: weight {w.shape} and bias {b.shape} disagree")
            if k and weights[k - 1].shape[1] != w.shape[0]:
                raise DimensionError(f"layer {k}: input width {w.shape[0]} != previous output {weights[k - 1].shape[1]}")
        for array in (*weights, *biases):
            array.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def dims(self) -> list[int]:
        return [int(self.weights[0].shape[0])] + [int(w.shape[1]) for w in self.weights]

    @property
    def num_classes(self) -> int:
        return self.dims[-1]

    def arrays(self) -> list[np.ndarray]:
        """Parameters in optimizer order: w0, b0, w1, b1, ..."""
        out: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            out.extend((w, b))
        return out

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray]) -> ModelParams:
        return cls(weights=tuple(arrays[0::2]), biases=tuple(arrays[1::2]))

    def __repr__(self) -> str:
        """String representation."""
        return f"ModelParams(dims={self.dims})"


def init_model(dims: Sequence[int], seed: int) -> ModelParams:
    """Fan-in scaled uniform initialization with zero biases.

    Each weight is drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).

    Args:
        dims: Layer widths [input, hidden..., C]
        seed: Initialization seed

    Raises:
        ParameterError: If fewer than two sizes are given or a size is < 1
    """
    sizes = [int(d) for d in dims]
    if len(sizes) < 2 or any(d < 1 for d in sizes):
        raise ParameterError(f"invalid layer sizes {list(dims)}")
    if sizes[-1] < 2:
        raise ParameterError(f"output width must be C >= 2, got {sizes[-1]}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    weights = []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
    biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
    return ModelParams(weights=tuple(weights), biases=tuple(biases))


def forward(params: Sequence[Tensor], features: Tensor) -> Tensor:
    """Differentiable forward pass; params in optimizer order."""
    h = features
    layers = len(params) // 2
    for k in range(layers):
        h = h @ params[2 * k] + params[2 * k + 1]
        if k < layers - 1:
            h = h.relu()
    return h


def predict_logits(model: ModelParams, features: ArrayLike) -> np.ndarray:
    """Raw logits for every row of features.

    Raises:
        DimensionError: If the feature width differs from the model's input width
    """
    x = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if x.shape[1] != model.dims[0]:
        raise DimensionError(f"features {x.shape} do not match model input width {model.dims[0]}")
    h = x
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases, strict=True)):
        h = h @ w + b
        if k < last:
            h = np.maximum(h, 0.0)
    return h


def to_checkpoint(model: ModelParams) -> Checkpoint:
    return Checkpoint(
        format_version=CHECKPOINT_FORMAT_VERSION,
        dims=model.dims,
        weights=[w.tolist() for w in model.weights],
        biases=[b.tolist() for b in model.biases],
    )


def from_checkpoint(checkpoint: Checkpoint) -> ModelParams:
    """Rebuild parameters; raises ParameterError on version or shape mismatch."""
    if checkpoint.format_version != CHECKPOINT_FORMAT_VERSION:
        raise ParameterError(f"unsupported checkpoint format {checkpoint.format_version}")
    model = ModelParams(
        weights=tuple(np.array(w, dtype=np.float64) for w in checkpoint.weights),
        biases=tuple(np.array(b, dtype=np.float64) for b in checkpoint.biases),
    )
    if model.dims != checkpoint.dims:
        raise ParameterError(f"checkpoint dims {checkpoint.dims} do not match arrays {model.dims}")
    return model
