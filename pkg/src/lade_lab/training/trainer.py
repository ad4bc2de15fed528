"""Deterministic mini-batch training loop.

The run is a pure function of (initial model, dataset, config): batch order
comes from a Philox generator keyed by (seed, epoch) and every reduction runs
in a fixed order.
"""

import logging
import math

import numpy as np
import pandas as pd

from lade_lab.autodiff import Tensor
from lade_lab.data import Dataset
from lade_lab.errors import DimensionError, NumericFailureError, ParameterError
from lade_lab.labels import LabelDistribution
from lade_lab.losses import compute_loss
from lade_lab.schemas import EpochRecord, LossSpec, TrainConfig
from lade_lab.training.model import ModelParams, forward
from lade_lab.training.optim import SGD, learning_rate

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["epoch", "lr", "mean_loss", "train_accuracy"]


def source_distribution(dataset: Dataset) -> LabelDistribution:
    """Empirical training prior p_s(y), fixed for the whole run."""
    return LabelDistribution.from_weights(np.asarray(dataset.class_counts, dtype=np.float64))


def batch_order(seed: int, epoch: int, num_samples: int) -> np.ndarray:
    """Shuffled sample indices for one epoch."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(epoch,))
    return np.random.Generator(np.random.Philox(sequence)).permutation(num_samples)


def loss_and_gradients(
    model: ModelParams,
    features: np.ndarray,
    labels: np.ndarray,
    p_s: LabelDistribution,
    loss: LossSpec,
) -> tuple[float, list[np.ndarray], np.ndarray]:
    """Evaluate the selected loss on one batch and backpropagate.

    Returns:
        (loss value, gradients in optimizer order, batch logits)
    """
    params = [Tensor(a, requires_grad=True) for a in model.arrays()]
    logits = forward(params, Tensor(features))
    value = compute_loss(logits, labels, p_s, loss)
    value.backward()
    grads = [np.array(p.grad) for p in params]
    return value.item(), grads, logits.numpy()


def train(
    model: ModelParams,
    dataset: Dataset,
    config: TrainConfig,
    p_s: LabelDistribution | None = None,
) -> tuple[ModelParams, list[EpochRecord]]:
    """Train with SGD for config.epochs epochs of ceil(N / batch_size) steps.

    Args:
        model: Initial parameters
        dataset: Training samples
        config: Optimizer, schedule, seed and loss
        p_s: Source prior used by prior-aware losses (defaults to the
            dataset's empirical class distribution)

    Returns:
        Final parameters and one EpochRecord per epoch

    Raises:
        ParameterError: If the dataset is empty
        DimensionError: If the dataset does not match the model
        NumericFailureError: If a step produces a non-finite loss
    """
    if dataset.num_samples == 0:
        raise ParameterError("cannot train on an empty dataset")
    if dataset.dim != model.dims[0] or dataset.num_classes != model.num_classes:
        raise DimensionError(
            f"dataset (dim={dataset.dim}, C={dataset.num_classes}) does not match model dims {model.dims}"
        )
    prior = p_s if p_s is not None else source_distribution(dataset)

    n = dataset.num_samples
    steps = math.ceil(n / config.batch_size)
    optimizer = SGD(momentum=config.momentum, weight_decay=config.weight_decay)
    history: list[EpochRecord] = []

    for epoch in range(config.epochs):
        lr = learning_rate(config, epoch)
        order = batch_order(config.seed, epoch, n)
        loss_sum = 0.0
        correct = 0
        for step in range(steps):
            index = order[step * config.batch_size : (step + 1) * config.batch_size]
            labels = dataset.labels[index]
            value, grads, logits = loss_and_gradients(
                model, dataset.features[index], labels, prior, config.loss
            )
            if not math.isfinite(value):
                raise NumericFailureError(
                    f"non-finite loss {value!r} at epoch {epoch + 1}, step {step + 1}"
                )
            logger.debug("epoch %d step %d loss %.6f", epoch + 1, step + 1, value)
            model = ModelParams.from_arrays(optimizer.step(model.arrays(), grads, lr))
            loss_sum += value * index.size
            correct += int(np.sum(np.argmax(logits, axis=1) == labels))

        record = EpochRecord(
            epoch=epoch + 1, lr=lr, mean_loss=loss_sum / n, train_accuracy=correct / n
        )
        history.append(record)
        logger.info(
            "epoch %d/%d lr=%.4g loss=%.5f acc=%.4f",
            record.epoch, config.epochs, lr, record.mean_loss, record.train_accuracy,
        )

    return model, history


def history_to_frame(history: list[EpochRecord]) -> pd.DataFrame:
    """Tabular form with header epoch,lr,mean_loss,train_accuracy."""
    return pd.DataFrame([r.model_dump() for r in history], columns=HISTORY_COLUMNS)
