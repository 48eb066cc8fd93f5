"""Classification losses: plain cross-entropy and online label smoothing.

Online label smoothing keeps one soft-target row per class, refreshed
once per epoch with the average predicted distribution over training
samples that were classified correctly.  The per-sample loss mixes the
hard one-hot target with the current soft row:

    loss = w * H(onehot(y), p) + (1 - w) * H(S[y], p)

With w = 1 this is exactly the cross-entropy loss.  Soft rows start at
the classic smoothed one-hot (1 - eps) * onehot + eps / C.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ContractError, StateError
from .head import predict

DEFAULT_SMOOTHING = 0.1
DEFAULT_HARD_WEIGHT = 0.5


def _check_label(label: int, num_classes: int) -> int:
    label = int(label)
    if not 0 <= label < num_classes:
        raise ContractError(f"label {label} out of range for {num_classes} classes")
    return label


def one_hot(label: int, num_classes: int) -> np.ndarray:
    out = np.zeros(num_classes)
    out[_check_label(label, num_classes)] = 1.0
    return out


def ce_loss(logits: Tensor, label: int) -> Tensor:
    """-log softmax(logits)[label], computed via log-sum-exp."""
    return ad.cross_entropy_logits(logits, one_hot(label, logits.shape[0]))


class OLSState:
    """Per-class soft-label targets updated once per epoch."""

    def __init__(self, num_classes: int, smoothing: float = DEFAULT_SMOOTHING,
                 hard_weight: float = DEFAULT_HARD_WEIGHT):
        if num_classes < 1:
            raise ContractError(f"need at least one class, got {num_classes}")
        if not 0.0 <= smoothing <= 1.0 or not 0.0 <= hard_weight <= 1.0:
            raise ContractError("smoothing and hard_weight must lie in [0, 1]")
        self.num_classes = num_classes
        self.smoothing = smoothing
        self.hard_weight = hard_weight
        eye = np.eye(num_classes)
        self.soft = (1.0 - smoothing) * eye + smoothing / num_classes
        self.accum = np.zeros((num_classes, num_classes))
        self.counts = np.zeros(num_classes, dtype=np.int64)

    def _check_rows(self) -> None:
        if np.any(self.soft < 0) or np.any(np.abs(self.soft.sum(axis=1) - 1.0) > 1e-9):
            raise StateError("soft-label rows are no longer probability distributions")

    def target_for(self, label: int) -> np.ndarray:
        """Mixed hard/soft target distribution for the given true class."""
        label = _check_label(label, self.num_classes)
        self._check_rows()
        w = self.hard_weight
        return w * one_hot(label, self.num_classes) + (1.0 - w) * self.soft[label]

    def observe(self, probs: np.ndarray, label: int) -> None:
        """Record a prediction; only correctly classified samples count."""
        probs = np.asarray(probs, dtype=np.float64)
        label = _check_label(label, self.num_classes)
        if predict(probs) == label:
            self.accum[label] += probs
            self.counts[label] += 1

    def epoch_end(self) -> None:
        """Replace soft rows that saw correct samples by their mean prediction."""
        hit = self.counts > 0
        self.soft[hit] = self.accum[hit] / self.counts[hit, None]
        self.accum[:] = 0.0
        self.counts[:] = 0
        self._check_rows()


def ols_loss(logits: Tensor, label: int, state: OLSState) -> Tensor:
    """Hard/soft mixed cross-entropy against the current soft targets."""
    if logits.shape[0] != state.num_classes:
        raise ContractError(
            f"logits have {logits.shape[0]} classes but state tracks {state.num_classes}"
        )
    return ad.cross_entropy_logits(logits, state.target_for(label))
