"""Accuracy, Many/Medium/Few grouping and the calibration metric suite.

All functions take an N x C probability (or logit) matrix and integer labels,
are permutation-invariant over samples and reduce in a fixed order, so
results are reproducible bit for bit.

Confidence bins are left-open and right-closed: bin m (1-based) holds
confidences in ((m-1)/M, m/M], and a confidence of exactly 0 falls in bin 1.
"""

from collections.abc import Sequence

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike

from lade_lab.errors import DimensionError, DomainError, ParameterError
from lade_lab.labels import CountProfile
from lade_lab.schemas import CalibrationReport, GroupAccuracy, LogitStats, ReliabilityBin

DEFAULT_BINS = 20
MANY_THRESHOLD = 100
FEW_THRESHOLD = 20

BIN_COLUMNS = ["bin", "count", "acc", "conf"]
LOGIT_STATS_COLUMNS = ["class", "pos_mean", "pos_var", "neg_mean", "neg_var"]
AVG_PROB_COLUMNS = ["class", "avg_prob"]


def _check(probs: ArrayLike, labels: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.ndim != 2:
        raise DimensionError(f"expected an N x C matrix, got shape {p.shape}")
    if p.shape[0] == 0:
        raise ParameterError("metrics need at least one sample")
    if y.shape != (p.shape[0],):
        raise DimensionError(f"matrix {p.shape} and labels {y.shape} disagree")
    if y.min() < 0 or y.max() >= p.shape[1]:
        raise IndexError(f"labels must lie in [0, {p.shape[1]})")
    return p, y


def _check_bins(n_bins: int) -> None:
    if n_bins < 1:
        raise ParameterError(f"bin count must be >= 1, got {n_bins}")


def _bin_index(values: np.ndarray, n_bins: int) -> np.ndarray:
    """0-based bin of each value under the ((m-1)/M, m/M] rule."""
    upper_edges = np.arange(1, n_bins + 1, dtype=np.float64) / n_bins
    index = np.searchsorted(upper_edges, values, side="left")
    return np.minimum(index, n_bins - 1)


# ============================================================================
# Accuracy
# ============================================================================


def top1_accuracy(probs: ArrayLike, labels: ArrayLike) -> float:
    """Fraction of rows whose argmax equals the label (ties go to the lowest index)."""
    p, y = _check(probs, labels)
    return float(np.mean(np.argmax(p, axis=1) == y))


def class_groups(train_counts: CountProfile | ArrayLike) -> dict[str, list[int]]:
    """Partition classes by training count: many > 100, medium 20..100, few < 20."""
    counts = (
        train_counts.as_array()
        if isinstance(train_counts, CountProfile)
        else np.asarray(train_counts, dtype=np.int64)
    )
    groups: dict[str, list[int]] = {"many": [], "medium": [], "few": []}
    for c, n in enumerate(counts.tolist()):
        if n > MANY_THRESHOLD:
            groups["many"].append(c)
        elif n >= FEW_THRESHOLD:
            groups["medium"].append(c)
        else:
            groups["few"].append(c)
    return groups


def group_accuracy(
    probs: ArrayLike, labels: ArrayLike, train_counts: CountProfile | ArrayLike
) -> GroupAccuracy:
    """Top-1 accuracy per Many/Medium/Few group plus overall.

    A group with no classes (or no test samples) is reported as None, not 0.
    """
    p, y = _check(probs, labels)
    groups = class_groups(train_counts)
    if sum(len(members) for members in groups.values()) != p.shape[1]:
        raise DimensionError(f"train counts cover {sum(map(len, groups.values()))} classes, probs have {p.shape[1]}")

    correct = np.argmax(p, axis=1) == y
    scores: dict[str, float | None] = {}
    for name, members in groups.items():
        mask = np.isin(y, members)
        scores[name] = float(np.mean(correct[mask])) if mask.any() else None
    return GroupAccuracy(all=float(np.mean(correct)), **scores)


# ============================================================================
# Calibration
# ============================================================================


def reliability_bins(
    probs: ArrayLike, labels: ArrayLike, n_bins: int = DEFAULT_BINS
) -> list[ReliabilityBin]:
    """Per-bin sample count, accuracy and mean confidence.

    Confidence is the max-class probability. Empty bins have acc = conf = 0.
    """
    p, y = _check(probs, labels)
    _check_bins(n_bins)
    confidence = np.max(p, axis=1)
    correct = (np.argmax(p, axis=1) == y).astype(np.float64)
    index = _bin_index(confidence, n_bins)

    bins = []
    for m in range(n_bins):
        members = index == m
        count = int(np.count_nonzero(members))
        acc = float(np.sum(correct[members]) / count) if count else 0.0
        conf = float(np.sum(confidence[members]) / count) if count else 0.0
        bins.append(ReliabilityBin(bin=m + 1, count=count, acc=acc, conf=conf))
    return bins


def ece_from_bins(bins: Sequence[ReliabilityBin]) -> float:
    """(1/N) sum_m |B_m| |acc(B_m) - conf(B_m)|, N being the total bin count."""
    total = sum(b.count for b in bins)
    if total == 0:
        raise ParameterError("reliability table holds no samples")
    gap = 0.0
    for b in bins:
        gap += b.count * abs(b.acc - b.conf)
    return gap / total


def ece(probs: ArrayLike, labels: ArrayLike, n_bins: int = DEFAULT_BINS) -> float:
    """Expected calibration error on max-class confidence."""
    return ece_from_bins(reliability_bins(probs, labels, n_bins))


def classwise_ece(probs: ArrayLike, labels: ArrayLike, n_bins: int = DEFAULT_BINS) -> float:
    """Calibration error of every class probability, averaged over classes.

    For class j, samples are binned on p(j|x) and acc is the indicator
    label == j. Each class term is divided by the total N (not by the count
    of class j) before averaging over the C classes.
    """
    p, y = _check(probs, labels)
    _check_bins(n_bins)
    n, num_classes = p.shape
    if num_classes < 2:
        raise ParameterError("classwise ECE needs C >= 2")

    total = 0.0
    for j in range(num_classes):
        column = p[:, j]
        hits = (y == j).astype(np.float64)
        index = _bin_index(column, n_bins)
        gap = 0.0
        for m in range(n_bins):
            members = index == m
            if members.any():
                gap += abs(float(np.sum(hits[members])) - float(np.sum(column[members])))
        total += gap / n
    return total / num_classes


def brier(probs: ArrayLike, labels: ArrayLike) -> float:
    """Mean over samples of sum_c (p(c|x) - 1[y = c])^2."""
    p, y = _check(probs, labels)
    onehot = np.zeros_like(p)
    onehot[np.arange(y.size), y] = 1.0
    return float(np.mean(np.sum((p - onehot) ** 2, axis=1)))


def nll(probs: ArrayLike, labels: ArrayLike) -> float:
    """Mean of -log p(y_i|x_i).

    Raises:
        DomainError: If any true-class probability is zero
    """
    p, y = _check(probs, labels)
    true_class = p[np.arange(y.size), y]
    if np.any(true_class <= 0.0):
        raise DomainError(f"{int(np.sum(true_class <= 0.0))} samples assign zero probability to their label")
    return float(np.mean(-np.log(true_class)))


def calibration_report(
    probs: ArrayLike, labels: ArrayLike, n_bins: int = DEFAULT_BINS
) -> CalibrationReport:
    bins = reliability_bins(probs, labels, n_bins)
    return CalibrationReport(
        n_bins=n_bins,
        bins=bins,
        ece=ece_from_bins(bins),
        classwise_ece=classwise_ece(probs, labels, n_bins),
        brier=brier(probs, labels),
        nll=nll(probs, labels),
    )


# ============================================================================
# Diagnostics
# ============================================================================


def avg_prob_per_class(probs: ArrayLike) -> np.ndarray:
    """Column means of the probability matrix."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2:
        raise DimensionError(f"expected an N x C matrix, got shape {p.shape}")
    if p.shape[0] == 0:
        raise ParameterError("need at least one sample")
    return np.mean(p, axis=0)


def logit_stats_per_class(logits: ArrayLike, labels: ArrayLike) -> list[LogitStats]:
    """Mean and population variance of logits[:, c] over positives and negatives of c.

    Positives are samples labelled c; a class without positives (or
    negatives) reports those statistics as None.
    """
    f, y = _check(logits, labels)
    stats = []
    for c in range(f.shape[1]):
        column = f[:, c]
        positive = column[y == c]
        negative = column[y != c]
        stats.append(
            LogitStats(
                class_index=c,
                pos_mean=float(np.mean(positive)) if positive.size else None,
                pos_var=float(np.var(positive)) if positive.size else None,
                neg_mean=float(np.mean(negative)) if negative.size else None,
                neg_var=float(np.var(negative)) if negative.size else None,
            )
        )
    return stats


def mean_positive_logit(logits: ArrayLike, labels: ArrayLike) -> float:
    """Average of f(x)[y] over samples; approaches log C for disentangled logits."""
    f, y = _check(logits, labels)
    return float(np.mean(f[np.arange(y.size), y]))


def mean_total_variation(p: ArrayLike, q: ArrayLike) -> float:
    """Mean over rows of (1/2) sum_c |p - q|."""
    a = np.asarray(p, dtype=np.float64)
    b = np.asarray(q, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionError(f"cannot compare shapes {a.shape} and {b.shape}")
    if a.shape[0] == 0:
        raise ParameterError("need at least one row")
    return float(np.mean(0.5 * np.sum(np.abs(a - b), axis=1)))


# ============================================================================
# Tables
# ============================================================================


def bins_to_frame(bins: Sequence[ReliabilityBin]) -> pd.DataFrame:
    return pd.DataFrame([b.model_dump() for b in bins], columns=BIN_COLUMNS)


def bins_from_frame(frame: pd.DataFrame) -> list[ReliabilityBin]:
    return [
        ReliabilityBin(bin=int(r["bin"]), count=int(r["count"]), acc=float(r["acc"]), conf=float(r["conf"]))
        for r in frame[BIN_COLUMNS].to_dict("records")
    ]


def logit_stats_to_frame(stats: Sequence[LogitStats]) -> pd.DataFrame:
    rows = [s.model_dump() for s in stats]
    frame = pd.DataFrame(rows, columns=["class_index", *LOGIT_STATS_COLUMNS[1:]])
    return frame.rename(columns={"class_index": "class"})


def avg_prob_to_frame(avg: ArrayLike) -> pd.DataFrame:
    values = np.asarray(avg, dtype=np.float64)
    return pd.DataFrame({"class": np.arange(values.size), "avg_prob": values})
