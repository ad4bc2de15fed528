"""Tests for finite-difference gradient checking."""

import numpy as np
import pytest

from lade_lab.autodiff import Tensor, grad_check, numerical_gradient
from lade_lab.errors import ParameterError


def test_numerical_gradient_of_square() -> None:
    """Test central differences of sum(x^2)."""
    x = np.array([1.0, -2.0, 0.5])
    grad = numerical_gradient(lambda t: t.square().sum(), x)
    np.testing.assert_allclose(grad, 2.0 * x, atol=1e-8)


def test_grad_check_composed_function() -> None:
    """Test grad_check on a composed expression stays below 1e-4."""
    rng = np.random.default_rng(3)
    w = rng.normal(size=(3, 2))

    def f(x: Tensor) -> Tensor:
        return ((x @ Tensor(w)).relu().exp() + 1.0).log().logsumexp(axis=1).mean()

    assert grad_check(f, rng.normal(size=(4, 3))) <= 1e-4


def test_grad_check_accepts_tensor_point() -> None:
    """Test grad_check takes a Tensor as the point."""
    assert grad_check(lambda t: (t * t * t).sum(), Tensor([0.3, -0.7])) <= 1e-4


def test_grad_check_rejects_nonpositive_step() -> None:
    """Test h <= 0 raises ParameterError."""
    with pytest.raises(ParameterError):
        grad_check(lambda t: t.sum(), np.ones(2), h=0.0)


def test_grad_check_detects_wrong_gradient() -> None:
    """Test a deliberately wrong backward rule is caught."""

    def broken(x: Tensor) -> Tensor:
        # forward x^2, backward as if x^3
        values = x.values
        return x._make(values * values, (x,), lambda g: (3.0 * values * values * g,), "broken").sum()

    assert grad_check(broken, np.array([1.0, 2.0])) > 1e-2


def _normal(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.normal(size=shape)


def _positive(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    return rng.uniform(0.5, 2.0, size=shape)


def _off_zero(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    # keep relu inputs clear of the kink
    return rng.choice([-1.0, 1.0], size=shape) * rng.uniform(0.1, 2.0, size=shape)


WEIGHTS = np.random.default_rng(101).normal(size=(4, 3))
MATRIX = np.random.default_rng(102).normal(size=(3, 2))
LEFT = np.random.default_rng(103).normal(size=(5, 4))
DIVISOR = np.random.default_rng(104).uniform(0.5, 2.0, size=(4, 3))
LABELS = np.array([2, 0, 1, 1])
ROWS = np.array([3, 0, 3, 1])

OPS = {
    "add": (_normal, lambda x: ((x + Tensor(WEIGHTS)) * Tensor(WEIGHTS)).sum()),
    "sub": (_normal, lambda x: ((Tensor(WEIGHTS) - x) * x).sum()),
    "mul": (_normal, lambda x: (x * x * Tensor(WEIGHTS)).sum()),
    "div": (_normal, lambda x: (x / Tensor(DIVISOR)).square().sum()),
    "rdiv": (_positive, lambda x: (Tensor(WEIGHTS) / x).sum()),
    "exp": (_normal, lambda x: (x.exp() * Tensor(WEIGHTS)).sum()),
    "log": (_positive, lambda x: (x.log() * Tensor(WEIGHTS)).sum()),
    "square": (_normal, lambda x: (x.square() * Tensor(WEIGHTS)).sum()),
    "relu": (_off_zero, lambda x: (x.relu() * Tensor(WEIGHTS)).sum()),
    "sum_axis": (_normal, lambda x: x.sum(axis=1).square().sum()),
    "mean": (_normal, lambda x: x.mean(axis=0).square().mean()),
    "max": (_normal, lambda x: x.max() * 3.0),
    "max_axis": (_normal, lambda x: (x.max(axis=1) * Tensor(WEIGHTS[:, 0])).sum()),
    "logsumexp": (_normal, lambda x: x.logsumexp()),
    "logsumexp_axis": (_normal, lambda x: (x.logsumexp(axis=1) * Tensor(WEIGHTS[:, 1])).sum()),
    "matmul_right": (_normal, lambda x: ((x @ Tensor(MATRIX)).square()).sum()),
    "matmul_left": (_normal, lambda x: ((Tensor(LEFT) @ x).square()).sum()),
    "gather": (_normal, lambda x: (x.gather(LABELS) * Tensor(WEIGHTS[:, 2])).sum()),
    "take": (_normal, lambda x: (x.take(ROWS).square() * Tensor(WEIGHTS)).sum()),
    "column": (_normal, lambda x: (x.column(1) * Tensor(WEIGHTS[:, 0])).sum()),
}


@pytest.mark.parametrize("name", sorted(OPS))
def test_every_op_matches_central_differences(name: str) -> None:
    """Test each op's gradient against central differences at 100 random points."""
    draw, f = OPS[name]
    rng = np.random.default_rng(sorted(OPS).index(name))
    worst = max(grad_check(f, draw(rng, (4, 3))) for _ in range(100))
    assert worst <= 1e-6


def test_grad_check_of_sum_is_exact() -> None:
    """Test grad_check(sum(x)) stays within 1e-10 at random points."""
    rng = np.random.default_rng(5)
    for _ in range(20):
        # dyadic point and step keep every difference exact
        x = rng.integers(-512, 512, size=7) / 64.0
        assert grad_check(lambda t: t.sum(), x, h=2.0**-16) <= 1e-10
