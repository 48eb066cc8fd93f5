"""Pooling, classification head, and prediction.

The two attended feature maps are sum-pooled over patches, concatenated
into a 2d joint vector, passed through one relu layer and a linear
classifier.  Probabilities are the softmax of the logits; prediction is
the argmax with lowest-index tie-breaking.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ContractError, ShapeError
from .params import HeadParams


def head_forward(attended_image: Tensor, attended_text: Tensor, params: HeadParams) -> tuple[Tensor, Tensor]:
    """Class logits and probabilities from the two attended feature maps."""
    if attended_image.ndim != 2 or attended_text.ndim != 2:
        raise ShapeError(
            f"head: expected 2-D feature maps, got {attended_image.shape} and {attended_text.shape}"
        )
    if attended_image.shape[1] != attended_text.shape[1]:
        raise ShapeError(
            f"head: feature dims differ, {attended_image.shape} vs {attended_text.shape}"
        )
    joint = ad.concat(ad.sum_pool(attended_image, axis=0), ad.sum_pool(attended_text, axis=0), axis=0)
    if joint.shape[0] != params.W1.shape[0]:
        raise ShapeError(f"head: joint dim {joint.shape[0]} does not match W1 {params.W1.shape}")
    hidden = ad.relu(ad.add(ad.matmul(joint, params.W1), params.b1))
    logits = ad.add(ad.matmul(hidden, params.W2), params.b2)
    return logits, ad.softmax(logits, axis=0)


def predict(probs) -> int:
    """Index of the largest probability; ties resolve to the lowest index."""
    values = probs.data if isinstance(probs, Tensor) else np.asarray(probs, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ContractError(f"predict: need a nonempty 1-D distribution, got shape {values.shape}")
    return int(np.argmax(values))
