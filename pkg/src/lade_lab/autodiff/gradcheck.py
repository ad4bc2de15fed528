"""Finite-difference verification of analytic gradients."""

from collections.abc import Callable

import numpy as np

from lade_lab.autodiff.tensor import Tensor
from lade_lab.errors import ParameterError

ScalarFn = Callable[[Tensor], Tensor]


def numerical_gradient(f: ScalarFn, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar tensor function at x."""
    base = np.array(x, dtype=np.float64)
    grad = np.empty_like(base)
    flat = base.reshape(-1)
    for k in range(flat.size):
        plus = flat.copy()
        minus = flat.copy()
        plus[k] += h
        minus[k] -= h
        f_plus = f(Tensor(plus.reshape(base.shape))).item()
        f_minus = f(Tensor(minus.reshape(base.shape))).item()
        grad.reshape(-1)[k] = (f_plus - f_minus) / (2.0 * h)
    return grad


def analytic_gradient(f: ScalarFn, x: np.ndarray) -> np.ndarray:
    """Gradient of f at x from one backward pass."""
    leaf = Tensor(x, requires_grad=True)
    f(leaf).backward()
    assert leaf.grad is not None
    return np.array(leaf.grad)


def grad_check(f: ScalarFn, x: Tensor | np.ndarray, h: float = 1e-5) -> float:
    """Compare the autodiff gradient of f against central differences.

    Args:
        f: Scalar-valued tensor function
        x: Point at which to check
        h: Finite-difference step

    Returns:
        max over coordinates of |analytic - numeric| / max(1, |analytic|)

    Raises:
        ParameterError: If h is not positive
    """
    if not h > 0:
        raise ParameterError(f"finite-difference step must be positive, got {h}")
    point = x.numpy() if isinstance(x, Tensor) else np.array(x, dtype=np.float64)
    analytic = analytic_gradient(f, point)
    numeric = numerical_gradient(f, point, h)
    scale = np.maximum(1.0, np.abs(analytic))
    return float(np.max(np.abs(analytic - numeric) / scale))
