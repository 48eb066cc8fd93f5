"""Deterministic shuffled batching over loaded bundles.

Samples keep their native patch/token counts, so a batch is simply a
list of bundles; the training loop accumulates gradients across it.
The shuffle is a pure function of (seed, epoch) and the final partial
batch is kept.
"""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np

from ..exceptions import ContractError
from .bundles import EmbeddingBundle


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    rng = np.random.default_rng([seed, epoch])
    return rng.permutation(n)


def batch_iter(samples: Sequence[EmbeddingBundle], batch_size: int, seed: int,
               epoch: int = 0) -> Iterator[list[EmbeddingBundle]]:
    """Yield shuffled batches of samples for one epoch."""
    if not samples:
        raise ContractError("cannot iterate over an empty split")
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}")
    order = epoch_order(len(samples), seed, epoch)
    for start in range(0, len(samples), batch_size):
        yield [samples[i] for i in order[start: start + batch_size]]
