"""Model variants behind one forward interface.

Every variant consumes the same three streams (image patches, text
tokens, emotion patches) and produces class logits, so ablation runs
can swap them freely:

  full          gated fusion -> gated cross attention -> head
  no_emo        emotion stream severed; attention runs on a tanh
                projection of the raw image patches
  no_gmf        gated fusion replaced by per-patch concat + linear map
  dca           gated cross attention replaced by plain two-stage
                scaled dot-product attention (parameter-free)
  early_fusion  mean-pooled image and text concatenated into an MLP
  text_only     mean-pooled text into an MLP
  image_only    mean-pooled image into an MLP
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ConfigError
from .gca import gca_forward
from .gmf import gmf_forward
from .head import head_forward
from .params import (
    AlfredParams,
    GCAParams,
    HeadParams,
    expected_param_count,
    init_params,
    xavier_uniform,
    zeros_param,
)

VARIANTS = ("full", "no_emo", "no_gmf", "dca", "early_fusion", "text_only", "image_only")


@dataclass
class ModelOutput:
    logits: Tensor
    probs: Tensor
    att_text: Tensor | None = None   # m x n attention over tokens
    att_patch: Tensor | None = None  # m x m attention over patches
    gate: Tensor | None = None       # m x d fusion gate


class Model:
    """Common surface: named parameters plus a three-stream forward."""

    variant: str

    def __init__(self, d: int, num_classes: int, score_mode: str = "bimodal"):
        self.d = d
        self.num_classes = num_classes
        self.score_mode = score_mode
        self._extra: dict[str, Tensor] = {}

    def named_params(self) -> list[tuple[str, Tensor]]:
        raise NotImplementedError

    def forward(self, f_i: Tensor, f_t: Tensor, f_e: Tensor) -> ModelOutput:
        raise NotImplementedError

    def forward_arrays(self, f_i, f_t, f_e) -> ModelOutput:
        return self.forward(Tensor(f_i), Tensor(f_t), Tensor(f_e))

    def zero_grad(self) -> None:
        for _, t in self.named_params():
            t.zero_grad()

    def param_count(self) -> int:
        return sum(t.size for _, t in self.named_params())


class FullModel(Model):
    variant = "full"

    def __init__(self, d, num_classes, score_mode="bimodal", seed=0, params: AlfredParams | None = None):
        super().__init__(d, num_classes, score_mode)
        self.params = params if params is not None else init_params(d, num_classes, score_mode, seed)

    def named_params(self):
        return list(self.params.named())

    def forward(self, f_i, f_t, f_e):
        fused, gate = gmf_forward(f_i, f_e, self.params.gmf)
        att = gca_forward(fused, f_t, self.params.gca)
        logits, probs = head_forward(att.attended_image, att.attended_text, self.params.head)
        return ModelOutput(logits, probs, att.att_text, att.att_patch, gate)


class NoEmotionModel(Model):
    """Emotion features are ignored entirely."""

    variant = "no_emo"

    def __init__(self, d, num_classes, score_mode="bimodal", seed=0):
        super().__init__(d, num_classes, score_mode)
        rng = np.random.default_rng(seed)
        self.W_proj = xavier_uniform(rng, d, d)
        self.b_proj = zeros_param((d,))
        self.gca = GCAParams.init(d, score_mode, rng)
        self.head = HeadParams.init(d, num_classes, rng)

    def named_params(self):
        named = [("proj.W", self.W_proj), ("proj.b", self.b_proj)]
        named += list(self.gca.named())
        named += list(self.head.named())
        return named

    def forward(self, f_i, f_t, f_e):
        base = ad.tanh(ad.add(ad.matmul(f_i, self.W_proj), self.b_proj))
        att = gca_forward(base, f_t, self.gca)
        logits, probs = head_forward(att.attended_image, att.attended_text, self.head)
        return ModelOutput(logits, probs, att.att_text, att.att_patch)


class NoGMFModel(Model):
    """Gated fusion swapped for per-patch concatenation plus a linear map."""

    variant = "no_gmf"

    def __init__(self, d, num_classes, score_mode="bimodal", seed=0):
        super().__init__(d, num_classes, score_mode)
        rng = np.random.default_rng(seed)
        self.W_cat = xavier_uniform(rng, 2 * d, d)
        self.b_cat = zeros_param((d,))
        self.gca = GCAParams.init(d, score_mode, rng)
        self.head = HeadParams.init(d, num_classes, rng)

    def named_params(self):
        named = [("cat.W", self.W_cat), ("cat.b", self.b_cat)]
        named += list(self.gca.named())
        named += list(self.head.named())
        return named

    def forward(self, f_i, f_t, f_e):
        stacked = ad.concat(f_i, f_e, axis=1)
        fused = ad.add(ad.matmul(stacked, self.W_cat), self.b_cat)
        att = gca_forward(fused, f_t, self.gca)
        logits, probs = head_forward(att.attended_image, att.attended_text, self.head)
        return ModelOutput(logits, probs, att.att_text, att.att_patch)


class DCAModel(Model):
    """Gated attention swapped for plain scaled dot-product attention.

    Mirrors the two-stage flow (patches attend tokens, then attended
    text re-attends patches) but with ungated 1/sqrt(d) dot scores.
    """

    variant = "dca"

    def __init__(self, d, num_classes, score_mode="bimodal", seed=0):
        super().__init__(d, num_classes, score_mode)
        rng = np.random.default_rng(seed)
        from .params import GMFParams

        self.gmf = GMFParams.init(d, rng)
        self.head = HeadParams.init(d, num_classes, rng)

    def named_params(self):
        return list(self.gmf.named()) + list(self.head.named())

    def forward(self, f_i, f_t, f_e):
        fused, gate = gmf_forward(f_i, f_e, self.gmf)
        inv = 1.0 / math.sqrt(self.d)
        att_text = ad.softmax(ad.scale(ad.matmul(fused, ad.transpose(f_t)), inv), axis=1)
        attended_text = ad.matmul(att_text, f_t)
        att_patch = ad.softmax(ad.scale(ad.matmul(attended_text, ad.transpose(fused)), inv), axis=1)
        attended_image = ad.matmul(att_patch, fused)
        logits, probs = head_forward(attended_image, attended_text, self.head)
        return ModelOutput(logits, probs, att_text, att_patch, gate)


class PooledMLPModel(Model):
    """Mean-pooled stream(s) through one relu layer and a classifier."""

    def __init__(self, d, num_classes, streams: tuple[str, ...], variant: str, seed=0):
        super().__init__(d, num_classes)
        self.streams = streams
        self.variant = variant
        rng = np.random.default_rng(seed)
        self.head = HeadParams.init(d, num_classes, rng, in_dim=len(streams) * d)

    def named_params(self):
        return list(self.head.named())

    def forward(self, f_i, f_t, f_e):
        pools = {"image": lambda: ad.mean(f_i, axis=0), "text": lambda: ad.mean(f_t, axis=0)}
        pooled = [pools[s]() for s in self.streams]
        joint = pooled[0] if len(pooled) == 1 else ad.concat(pooled[0], pooled[1], axis=0)
        hidden = ad.relu(ad.add(ad.matmul(joint, self.head.W1), self.head.b1))
        logits = ad.add(ad.matmul(hidden, self.head.W2), self.head.b2)
        return ModelOutput(logits, ad.softmax(logits, axis=0))


def build_variant(kind: str, d: int, num_classes: int, score_mode: str = "bimodal", seed: int = 0) -> Model:
    if kind == "full":
        return FullModel(d, num_classes, score_mode, seed)
    if kind == "no_emo":
        return NoEmotionModel(d, num_classes, score_mode, seed)
    if kind == "no_gmf":
        return NoGMFModel(d, num_classes, score_mode, seed)
    if kind == "dca":
        return DCAModel(d, num_classes, score_mode, seed)
    if kind == "early_fusion":
        return PooledMLPModel(d, num_classes, ("image", "text"), "early_fusion", seed)
    if kind == "text_only":
        return PooledMLPModel(d, num_classes, ("text",), "text_only", seed)
    if kind == "image_only":
        return PooledMLPModel(d, num_classes, ("image",), "image_only", seed)
    raise ConfigError(f"unknown variant {kind!r}; expected one of {VARIANTS}")


def variant_param_count(kind: str, d: int, num_classes: int, score_mode: str = "bimodal") -> int:
    """Closed-form parameter counts per variant (documented invariant)."""
    gmf = 3 * d * d + 2 * d
    gca = (4 if score_mode == "bimodal" else 2) * d * d + 4 * d + 2
    head = 2 * d * d + d + d * num_classes + num_classes
    if kind == "full":
        return expected_param_count(d, num_classes, score_mode)
    if kind == "no_emo":
        return (d * d + d) + gca + head
    if kind == "no_gmf":
        return (2 * d * d + d) + gca + head
    if kind == "dca":
        return gmf + head
    if kind == "early_fusion":
        return head
    if kind in ("text_only", "image_only"):
        return d * d + d + d * num_classes + num_classes
    raise ConfigError(f"unknown variant {kind!r}")
