"""Learnable parameter containers and their initialization.

Weight matrices are drawn from the Xavier-uniform distribution with
bound sqrt(6 / (fan_in + fan_out)); biases start at exactly zero.
Every container enumerates its tensors under stable dotted names so
optimizers, checkpoints and gradient checks can address them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor
from .exceptions import ConfigError

SCORE_MODES = ("bimodal", "literal")


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> Tensor:
    """Weight tensor ~ U(-a, a) with a = sqrt(6/(fan_in+fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_in, fan_out)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros_param(shape) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


@dataclass
class GMFParams:
    """Gated multimodal fusion weights: two tanh projections and a gate."""

    W_i: Tensor
    W_e: Tensor
    W_g: Tensor
    b_i: Tensor
    b_e: Tensor

    @classmethod
    def init(cls, d: int, rng: np.random.Generator) -> "GMFParams":
        return cls(
            W_i=xavier_uniform(rng, d, d),
            W_e=xavier_uniform(rng, d, d),
            W_g=xavier_uniform(rng, d, d),
            b_i=zeros_param((d,)),
            b_e=zeros_param((d,)),
        )

    def named(self, prefix: str = "gmf"):
        for field in ("W_i", "W_e", "W_g", "b_i", "b_e"):
            yield f"{prefix}.{field}", getattr(self, field)


@dataclass
class GCAParams:
    """Gated cross-attention weights for both attention stages.

    Stage 1 scores text tokens per image patch (W_ei, v_ei, b_ei, c_ei),
    stage 2 scores patches per attended-text row (W_t, v_t, b_t, c_t).
    U_t / U_ei are the cross projections that make scores depend on the
    attended row; they exist only in bimodal mode.
    """

    score_mode: str
    W_ei: Tensor
    W_t: Tensor
    v_ei: Tensor
    v_t: Tensor
    b_ei: Tensor
    b_t: Tensor
    c_ei: Tensor
    c_t: Tensor
    U_t: Tensor | None = None
    U_ei: Tensor | None = None

    @classmethod
    def init(cls, d: int, score_mode: str, rng: np.random.Generator) -> "GCAParams":
        if score_mode not in SCORE_MODES:
            raise ConfigError(f"score_mode must be one of {SCORE_MODES}, got {score_mode!r}")
        bimodal = score_mode == "bimodal"
        return cls(
            score_mode=score_mode,
            W_ei=xavier_uniform(rng, d, d),
            W_t=xavier_uniform(rng, d, d),
            U_t=xavier_uniform(rng, d, d) if bimodal else None,
            U_ei=xavier_uniform(rng, d, d) if bimodal else None,
            v_ei=xavier_uniform(rng, d, 1),
            v_t=xavier_uniform(rng, d, 1),
            b_ei=zeros_param((d,)),
            b_t=zeros_param((d,)),
            c_ei=zeros_param((1,)),
            c_t=zeros_param((1,)),
        )

    def named(self, prefix: str = "gca"):
        fields = ["W_ei", "W_t"]
        if self.score_mode == "bimodal":
            fields += ["U_t", "U_ei"]
        fields += ["v_ei", "v_t", "b_ei", "b_t", "c_ei", "c_t"]
        for field in fields:
            yield f"{prefix}.{field}", getattr(self, field)


@dataclass
class HeadParams:
    """Two-layer classification head over the pooled joint representation."""

    W1: Tensor
    b1: Tensor
    W2: Tensor
    b2: Tensor

    @classmethod
    def init(cls, d: int, num_classes: int, rng: np.random.Generator, in_dim: int | None = None) -> "HeadParams":
        in_dim = 2 * d if in_dim is None else in_dim
        return cls(
            W1=xavier_uniform(rng, in_dim, d),
            b1=zeros_param((d,)),
            W2=xavier_uniform(rng, d, num_classes),
            b2=zeros_param((num_classes,)),
        )

    def named(self, prefix: str = "head"):
        for field in ("W1", "b1", "W2", "b2"):
            yield f"{prefix}.{field}", getattr(self, field)


@dataclass
class AlfredParams:
    """Full fusion model: GMF -> GCA -> head, addressable by dotted name."""

    gmf: GMFParams
    gca: GCAParams
    head: HeadParams

    def named(self):
        yield from self.gmf.named()
        yield from self.gca.named()
        yield from self.head.named()

    def tensors(self) -> dict[str, Tensor]:
        return dict(self.named())

    def count(self) -> int:
        return sum(t.size for _, t in self.named())

    def zero_grad(self) -> None:
        for _, t in self.named():
            t.zero_grad()


def init_params(d: int, num_classes: int, score_mode: str = "bimodal", seed: int = 0) -> AlfredParams:
    """Deterministic model initialization: Xavier weights, zero biases."""
    if d < 1 or num_classes < 1:
        raise ConfigError(f"d and num_classes must be >= 1, got d={d}, C={num_classes}")
    rng = np.random.default_rng(seed)
    return AlfredParams(
        gmf=GMFParams.init(d, rng),
        gca=GCAParams.init(d, score_mode, rng),
        head=HeadParams.init(d, num_classes, rng),
    )


def expected_param_count(d: int, num_classes: int, score_mode: str = "bimodal") -> int:
    """Closed-form size of the full model's parameter vector."""
    gmf = 3 * d * d + 2 * d
    gca = (4 if score_mode == "bimodal" else 2) * d * d + 4 * d + 2
    head = 2 * d * d + d + d * num_classes + num_classes
    return gmf + gca + head
