"""MLP classifier, SGD optimizer and the training loop."""

from lade_lab.training.model import (
    ModelParams,
    from_checkpoint,
    init_model,
    predict_logits,
    to_checkpoint,
)
from lade_lab.training.optim import SGD, learning_rate
from lade_lab.training.trainer import source_distribution, train

__all__ = [
    "SGD",
    "ModelParams",
    "from_checkpoint",
    "init_model",
    "learning_rate",
    "predict_logits",
    "source_distribution",
    "to_checkpoint",
    "train",
]
