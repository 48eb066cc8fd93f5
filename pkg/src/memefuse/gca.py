"""Gated cross attention between emotion-aware image patches and text tokens.

Two chained attention stages:

  1. every patch p scores every token j, softmax over tokens gives
     att_text (m x n), and attended text is att_text @ f_t (m x d);
  2. every attended-text row scores every patch q, softmax over patches
     gives att_patch (m x m), and the feedback image representation is
     att_patch @ f_ei (m x d).

Scores come from the gated pairwise kernel
sigmoid(x[p] W + y[j] U + b) . v + c.  In "bimodal" mode (default) the
U projection couples the attended row into the score; "literal" mode
drops it, so each score row is constant and both softmaxes degenerate
to uniform averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import autodiff as ad
from .autodiff import Tensor
from .exceptions import ContractError, ShapeError
from .params import GCAParams


@dataclass
class GCAOutput:
    attended_image: Tensor   # m x d, patch features reweighted by text feedback
    attended_text: Tensor    # m x d, per-patch convex mix of token features
    att_text: Tensor         # m x n, stage-1 weights (rows sum to 1)
    att_patch: Tensor        # m x m, stage-2 weights (rows sum to 1)


def gca_forward(f_ei: Tensor, f_t: Tensor, params: GCAParams) -> GCAOutput:
    if f_ei.ndim != 2 or f_t.ndim != 2:
        raise ShapeError(f"gca: expected 2-D inputs, got {f_ei.shape} and {f_t.shape}")
    m, d = f_ei.shape
    n = f_t.shape[0]
    if f_t.shape[1] != d:
        raise ShapeError(f"gca: feature dims differ, {f_ei.shape} vs {f_t.shape}")
    if m == 0 or n == 0:
        raise ContractError("gca: need at least one patch and one token")
    if params.W_ei.shape != (d, d):
        raise ShapeError(f"gca: params built for d={params.W_ei.shape[0]}, inputs have d={d}")

    s1 = ad.gated_pair_scores(f_ei, f_t, params.W_ei, params.U_t, params.b_ei, params.v_ei, params.c_ei)
    att_text = ad.softmax(s1, axis=1)
    attended_text = ad.matmul(att_text, f_t)

    s2 = ad.gated_pair_scores(attended_text, f_ei, params.W_t, params.U_ei, params.b_t, params.v_t, params.c_t)
    att_patch = ad.softmax(s2, axis=1)
    attended_image = ad.matmul(att_patch, f_ei)

    return GCAOutput(attended_image, attended_text, att_text, att_patch)
