"""Reverse-mode automatic differentiation over dense float64 arrays."""

from lade_lab.autodiff.gradcheck import grad_check, numerical_gradient
from lade_lab.autodiff.tensor import Tensor, as_tensor

__all__ = ["Tensor", "as_tensor", "grad_check", "numerical_gradient"]
