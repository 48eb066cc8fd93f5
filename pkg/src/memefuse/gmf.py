"""Gated multimodal fusion of image and emotion patch features.

Both streams are tanh-projected, a sigmoid gate is computed from their
Hadamard interaction, and the output is the gate-weighted convex blend:

    h_i  = tanh(f_i W_i + b_i)
    h_e  = tanh(f_e W_e + b_e)
    g    = sigmoid((h_i * h_e) W_g)
    f_ei = g * h_e + (1 - g) * h_i

Since g is strictly inside (0, 1), every output component lies between
the corresponding components of h_i and h_e.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ShapeError
from .params import GMFParams


def gmf_forward(f_i: Tensor, f_e: Tensor, params: GMFParams) -> tuple[Tensor, Tensor]:
    """Fuse image and emotion features; returns (fused m x d, gate m x d)."""
    if f_i.shape != f_e.shape or f_i.ndim != 2:
        raise ShapeError(f"gmf: image and emotion features must share (m,d), got {f_i.shape} and {f_e.shape}")
    d = f_i.shape[1]
    if params.W_i.shape != (d, d):
        raise ShapeError(f"gmf: params built for d={params.W_i.shape[0]}, inputs have d={d}")

    h_i = ad.tanh(ad.add(ad.matmul(f_i, params.W_i), params.b_i))
    h_e = ad.tanh(ad.add(ad.matmul(f_e, params.W_e), params.b_e))
    gate = ad.sigmoid(ad.matmul(ad.hadamard(h_i, h_e), params.W_g))
    ones = Tensor(np.ones(gate.shape))
    fused = ad.add(ad.hadamard(gate, h_e), ad.hadamard(ad.sub(ones, gate), h_i))
    return fused, gate
