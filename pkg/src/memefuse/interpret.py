"""Attention and input-gradient explanations for single samples.

For a sample, runs the forward pass with the three input streams as
tracked leaves, backpropagates the predicted class's logit, and reports

  * patch attention: column means of the patch-feedback attention matrix
  * token attention: column means of the token attention matrix
  * patch saliency: per-patch L2 norm of the logit gradient, summed over
    the image and emotion streams
  * token saliency: per-token L2 norm of the logit gradient

Saliency flows from the logit, not the loss, so unlabeled samples are
explainable.  Model weights are read-only here; the scratch gradients
this pass leaves on them are cleared before returning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data.bundles import EmbeddingBundle
from .head import predict
from .models import Model


@dataclass
class Explanation:
    id: str
    pred: int
    prob: float
    patch_attention: list[float]
    token_attention: list[float]
    patch_saliency: list[float]
    token_saliency: list[float]
    pred_name: str | None = None

    def to_dict(self) -> dict:
        doc = {
            "id": self.id,
            "pred": self.pred,
            "prob": self.prob,
            "patch_attention": self.patch_attention,
            "token_attention": self.token_attention,
            "patch_saliency": self.patch_saliency,
            "token_saliency": self.token_saliency,
        }
        if self.pred_name is not None:
            doc["pred_name"] = self.pred_name
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _row_norms(grad: np.ndarray | None, rows: int) -> np.ndarray:
    if grad is None:
        return np.zeros(rows)
    return np.sqrt((grad * grad).sum(axis=1))


def explain(model: Model, bundle: EmbeddingBundle, class_names: list[str] | None = None) -> Explanation:
    f_i = Tensor(bundle.f_i, requires_grad=True)
    f_t = Tensor(bundle.f_t, requires_grad=True)
    f_e = Tensor(bundle.f_e, requires_grad=True)
    out = model.forward(f_i, f_t, f_e)
    pred = predict(out.probs.data)
    ad.pick(out.logits, pred).backward()

    patch_sal = _row_norms(f_i.grad, bundle.m) + _row_norms(f_e.grad, bundle.m)
    token_sal = _row_norms(f_t.grad, bundle.n)
    patch_att = out.att_patch.data.mean(axis=0) if out.att_patch is not None else np.zeros(bundle.m)
    token_att = out.att_text.data.mean(axis=0) if out.att_text is not None else np.zeros(bundle.n)

    model.zero_grad()  # drop the scratch gradients this backward left behind
    return Explanation(
        id=bundle.id,
        pred=pred,
        prob=float(out.probs.data[pred]),
        patch_attention=[float(x) for x in patch_att],
        token_attention=[float(x) for x in token_att],
        patch_saliency=[float(x) for x in patch_sal],
        token_saliency=[float(x) for x in token_sal],
        pred_name=class_names[pred] if class_names else None,
    )
