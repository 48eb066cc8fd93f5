"""Adam optimizer over named parameter collections."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor
from .exceptions import ContractError


class AdamState:
    """Bias-corrected Adam with per-parameter moment buffers."""

    def __init__(self, named_params, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        for name, tensor in named_params:
            self.m[name] = np.zeros_like(tensor.data)
            self.v[name] = np.zeros_like(tensor.data)


def adam_step(named_params, state: AdamState, lr: float) -> None:
    """One in-place update; every parameter must carry a gradient."""
    params = list(named_params)
    for name, tensor in params:
        if not isinstance(tensor, Tensor) or tensor.grad is None:
            raise ContractError(f"adam_step: parameter {name!r} has no gradient")
        if name not in state.m:
            raise ContractError(f"adam_step: parameter {name!r} unknown to this optimizer state")
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for name, tensor in params:
        g = tensor.grad
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        tensor.data -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
