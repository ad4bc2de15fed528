"""Tests for label distributions, importance weights and post-compensation."""

import numpy as np
import pytest
from scipy.special import softmax

from lade_lab.errors import DimensionError, DomainError, ParameterError
from lade_lab.labels import (
    LabelDistribution,
    importance_weights,
    pc_adjust_logits,
    pc_softmax_probs,
)


def _random_distribution(rng: np.random.Generator, c: int) -> LabelDistribution:
    return LabelDistribution.from_weights(rng.uniform(0.01, 1.0, size=c))


def test_distribution_requires_two_classes() -> None:
    """Test C < 2 is rejected."""
    with pytest.raises(ParameterError):
        LabelDistribution(np.array([1.0]))


def test_distribution_rejects_zero_entries() -> None:
    """Test zero probability raises DomainError."""
    with pytest.raises(DomainError):
        LabelDistribution(np.array([1.0, 0.0]))


def test_distribution_rejects_bad_sum() -> None:
    """Test probabilities must sum to 1."""
    with pytest.raises(ParameterError):
        LabelDistribution(np.array([0.5, 0.6]))


def test_uniform_distribution() -> None:
    """Test uniform prior has equal entries."""
    p = LabelDistribution.uniform(4)
    np.testing.assert_array_equal(p.probs, [0.25] * 4)
    assert p.is_uniform()


def test_from_weights_normalizes() -> None:
    """Test weights are normalized to a distribution."""
    p = LabelDistribution.from_weights([100, 10, 1])
    np.testing.assert_allclose(p.probs, [100 / 111, 10 / 111, 1 / 111], atol=1e-15)
    assert not p.is_uniform()


def test_importance_weights_identity() -> None:
    """Test p_u = p_s gives unit weights."""
    p = LabelDistribution.from_weights([3, 1])
    np.testing.assert_array_equal(importance_weights(p, p), [1.0, 1.0])


def test_importance_weights_example() -> None:
    """Test p_u=[0.5,0.5], p_s=[0.9,0.1] gives [5/9, 5]."""
    w = importance_weights(LabelDistribution.uniform(2), LabelDistribution(np.array([0.9, 0.1])))
    np.testing.assert_allclose(w, [5 / 9, 5.0], atol=1e-12)


def test_importance_weights_telescope() -> None:
    """Test sum_c p_s(c) w[c] = 1 for random pairs."""
    rng = np.random.default_rng(0)
    for _ in range(100):
        p_s = _random_distribution(rng, 6)
        p_u = _random_distribution(rng, 6)
        assert abs(float(np.sum(p_s.probs * importance_weights(p_u, p_s))) - 1.0) <= 1e-12


def test_importance_weights_dimension_mismatch() -> None:
    """Test differing class counts raise an error."""
    with pytest.raises(DimensionError):
        importance_weights(LabelDistribution.uniform(2), LabelDistribution.uniform(3))


def test_pc_adjust_identity() -> None:
    """Test p_from = p_to leaves logits unchanged."""
    f = np.array([[0.3, -1.0, 2.0]])
    p = LabelDistribution.from_weights([1, 2, 3])
    np.testing.assert_allclose(pc_adjust_logits(f, p, p), f, atol=1e-15)


def test_pc_adjust_example() -> None:
    """Test f=[0,0], p_from=[0.9,0.1], p_to uniform."""
    out = pc_adjust_logits([0.0, 0.0], [0.9, 0.1], [0.5, 0.5])
    np.testing.assert_allclose(out, [np.log(5 / 9), np.log(5.0)], atol=1e-12)


def test_pc_adjust_inverse_restores_logits() -> None:
    """Test adjusting by (p, q) then (q, p) restores f."""
    rng = np.random.default_rng(1)
    f = rng.normal(size=(5, 4))
    p, q = _random_distribution(rng, 4), _random_distribution(rng, 4)
    np.testing.assert_allclose(pc_adjust_logits(pc_adjust_logits(f, p, q), q, p), f, atol=1e-12)


def test_pc_adjust_rejects_nonpositive_prior() -> None:
    """Test zero probability in a raw prior vector raises DomainError."""
    with pytest.raises(DomainError):
        pc_adjust_logits([0.0, 0.0], [1.0, 0.0], [0.5, 0.5])


def test_pc_softmax_identity_case() -> None:
    """Test p_s = p_t reduces to plain softmax."""
    rng = np.random.default_rng(2)
    f = rng.normal(size=(8, 5))
    p = _random_distribution(rng, 5)
    np.testing.assert_allclose(pc_softmax_probs(f, p, p), softmax(f, axis=1), atol=1e-12)
    np.testing.assert_array_equal(np.argmax(pc_softmax_probs(f, p, p), axis=1), np.argmax(f, axis=1))


def test_pc_softmax_example() -> None:
    """Test f=[0,0], p_s=[0.9,0.1], p_t uniform gives [0.1, 0.9]."""
    out = pc_softmax_probs(np.zeros((1, 2)), [0.9, 0.1], [0.5, 0.5])
    np.testing.assert_allclose(out, [[0.1, 0.9]], atol=1e-12)


def test_pc_softmax_rows_are_distributions() -> None:
    """Test rows sum to 1 with entries in (0, 1)."""
    rng = np.random.default_rng(4)
    probs = pc_softmax_probs(rng.normal(size=(20, 6)), _random_distribution(rng, 6), _random_distribution(rng, 6))
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    assert np.all((probs > 0) & (probs < 1))


def test_pc_softmax_shift_invariance() -> None:
    """Test adding a per-row constant leaves the output unchanged."""
    rng = np.random.default_rng(5)
    f = rng.normal(size=(6, 3))
    p_s, p_t = _random_distribution(rng, 3), _random_distribution(rng, 3)
    shifted = f + rng.normal(size=(6, 1)) * 10.0
    np.testing.assert_allclose(pc_softmax_probs(shifted, p_s, p_t), pc_softmax_probs(f, p_s, p_t), atol=1e-12)


def test_weighted_and_adjusted_forms_agree() -> None:
    """Test the prior-ratio weighted softmax equals softmax of adjusted logits on 1000 draws."""
    rng = np.random.default_rng(6)
    for _ in range(1000):
        c = int(rng.integers(2, 8))
        f = rng.normal(scale=3.0, size=c)
        p_s, p_t = _random_distribution(rng, c), _random_distribution(rng, c)

        weighted = p_t.probs / p_s.probs * np.exp(f)
        weighted = weighted / weighted.sum()

        assert np.max(np.abs(pc_softmax_probs(f, p_s, p_t) - weighted)) <= 1e-12
