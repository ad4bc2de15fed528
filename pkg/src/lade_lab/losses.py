"""Training objectives and the prior-injection inference rule.

- softmax_ce: plain cross-entropy on softmax(f)
- lade_ce: cross-entropy on the source-prior-weighted softmax of f
- lader_per_class / lader: the regularized Donsker-Varadhan objective that
  pushes f[y] towards log(p_u(x|y) / p_u(x)), estimated on one batch with
  importance weights p_u(y)/p_s(y)
- lade_loss: lade_ce + alpha * lader
- infer_probs: p_t(y) exp(f[y]) normalized over classes

All batch losses take an N x C logit Tensor and return a scalar Tensor.
"""

import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy.special import softmax

from lade_lab.autodiff import Tensor
from lade_lab.errors import DimensionError, ParameterError
from lade_lab.labels import LabelDistribution, importance_weights
from lade_lab.schemas import LadeConfig, LossKind, LossSpec

logger = logging.getLogger(__name__)

Labels = Sequence[int] | np.ndarray


def _check_batch(f: Tensor, labels: Labels) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    if f.ndim != 2 or y.shape != (f.shape[0],):
        raise DimensionError(f"logits {f.shape} and labels {y.shape} disagree")
    if y.size == 0:
        raise ParameterError("batch must contain at least one sample")
    if y.min() < 0 or y.max() >= f.shape[1]:
        raise IndexError(f"labels must lie in [0, {f.shape[1]})")
    return y


def _check_prior(f: Tensor, p: LabelDistribution) -> None:
    if p.num_classes != f.shape[1]:
        raise DimensionError(f"prior has {p.num_classes} classes, logits have {f.shape[1]}")


def softmax_ce(f: Tensor, labels: Labels) -> Tensor:
    """Mean over the batch of -log softmax(f)[i, y_i]."""
    y = _check_batch(f, labels)
    return (f.logsumexp(axis=1) - f.gather(y)).mean()


def lade_ce(f: Tensor, labels: Labels, p_s: LabelDistribution) -> Tensor:
    """Cross-entropy of p_s(y) e^{f[y]} / sum_c p_s(c) e^{f[c]}.

    Identical to softmax_ce(f + log p_s). With alpha = 0 this is the whole
    LADE objective, i.e. the Balanced Softmax loss.
    """
    _check_prior(f, p_s)
    return softmax_ce(f + p_s.log(), labels)


def lader_per_class(
    f: Tensor, labels: Labels, p_s: LabelDistribution, lambda_: float
) -> dict[int, Tensor]:
    """Per-class regularizer terms for the classes present in the batch.

    For each present class c:
        term1 = -(1/N_c) sum_{i: y_i = c} f[i, c]
        Z_c   = log((1/N) sum_i (p_u(y_i)/p_s(y_i)) e^{f[i, c]})
        L_c   = term1 + Z_c + lambda * Z_c^2

    N_c counts class c inside the batch. Z_c is a weighted log-sum-exp
    max-shifted together with the log-weights.
    """
    y = _check_batch(f, labels)
    _check_prior(f, p_s)
    if lambda_ < 0:
        raise ParameterError(f"lambda must be nonnegative, got {lambda_}")

    uniform = LabelDistribution.uniform(p_s.num_classes)
    log_weights = np.log(importance_weights(uniform, p_s))[y]
    log_n = math.log(y.size)

    terms: dict[int, Tensor] = {}
    for c in np.unique(y).tolist():
        column = f.column(c)
        positive_mean = column.take(np.flatnonzero(y == c)).mean()
        log_partition = (column + log_weights).logsumexp() - log_n
        terms[c] = -positive_mean + log_partition + lambda_ * log_partition.square()
    return terms


def lader(f: Tensor, labels: Labels, p_s: LabelDistribution, config: LadeConfig) -> Tensor:
    """Weighted sum over present classes of alpha_c * L_c.

    alpha_c defaults to p_s(c) and is not renormalized over the classes that
    happen to be present in the batch.
    """
    weights = np.asarray(
        config.class_weights if config.class_weights is not None else p_s.probs,
        dtype=np.float64,
    )
    if weights.size != p_s.num_classes:
        raise DimensionError(f"class_weights has {weights.size} entries, expected {p_s.num_classes}")

    total = Tensor(0.0)
    for c, term in lader_per_class(f, labels, p_s, config.lambda_).items():
        total = total + float(weights[c]) * term
    return total


def lade_loss(f: Tensor, labels: Labels, p_s: LabelDistribution, config: LadeConfig) -> Tensor:
    """lade_ce + alpha * lader; gradients flow through every term."""
    base = lade_ce(f, labels, p_s)
    if config.alpha == 0:
        return base
    return base + config.alpha * lader(f, labels, p_s, config)


def compute_loss(f: Tensor, labels: Labels, p_s: LabelDistribution, spec: LossSpec) -> Tensor:
    """Dispatch to the objective selected by spec.kind."""
    if spec.kind == LossKind.CE:
        return softmax_ce(f, labels)
    if spec.kind == LossKind.LADE_CE:
        return lade_ce(f, labels, p_s)
    return lade_loss(f, labels, p_s, spec)


def infer_probs(logits: np.ndarray, p_t: LabelDistribution) -> np.ndarray:
    """Posterior under p_t from disentangled logits: softmax(f + log p_t).

    Passing p_s instead of p_t gives the training-side probability that
    lade_ce optimizes.
    """
    f = np.asarray(logits, dtype=np.float64)
    if f.shape[-1] != p_t.num_classes:
        raise DimensionError(f"logits {f.shape} do not match prior of size {p_t.num_classes}")
    return softmax(f + p_t.log(), axis=-1)


def mc_weighted_expectation(f_col: np.ndarray, labels: Labels, p_s: LabelDistribution) -> float:
    """Single-batch estimate of E_{x ~ p_u(x)}[e^{f(x)[c]}].

    Returns (1/N) sum_i (p_u(y_i)/p_s(y_i)) e^{f_col[i]}, i.e. the partition
    estimate inside lader before taking the log.
    """
    column = np.asarray(f_col, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if column.shape != y.shape or y.size == 0:
        raise DimensionError(f"logit column {column.shape} and labels {y.shape} disagree")
    weights = importance_weights(LabelDistribution.uniform(p_s.num_classes), p_s)[y]
    return float(np.mean(weights * np.exp(column)))
