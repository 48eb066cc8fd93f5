"""Emotion-aware gated multimodal fusion for meme emotion classification.

Trains and evaluates a gated-fusion / gated-cross-attention classifier
over precomputed embedding bundles, with a small tape-based autodiff
engine underneath (compiled kernel for the pairwise attention scores,
NumPy fallback selected at import).
"""

from .autodiff import Tensor
from .backends import backend_name
from .data import (
    DatasetManifest,
    EmbeddingBundle,
    SynthConfig,
    generate_synthetic,
    load_bundle,
    load_manifest,
    save_bundle,
    save_manifest,
)
from .gca import gca_forward
from .gmf import gmf_forward
from .gradcheck import grad_check
from .head import head_forward, predict
from .interpret import Explanation, explain
from .losses import OLSState, ce_loss, ols_loss
from .metrics import MetricsReport, cohens_kappa, confusion_matrix, macro_scores
from .models import Model, build_variant
from .params import AlfredParams, expected_param_count, init_params
from .train import FitResult, TrainConfig, evaluate, fit

__version__ = "0.1.0"

__all__ = [
    "AlfredParams",
    "DatasetManifest",
    "EmbeddingBundle",
    "Explanation",
    "FitResult",
    "MetricsReport",
    "Model",
    "OLSState",
    "SynthConfig",
    "Tensor",
    "TrainConfig",
    "backend_name",
    "build_variant",
    "ce_loss",
    "cohens_kappa",
    "confusion_matrix",
    "evaluate",
    "expected_param_count",
    "explain",
    "fit",
    "gca_forward",
    "generate_synthetic",
    "gmf_forward",
    "grad_check",
    "head_forward",
    "init_params",
    "load_bundle",
    "load_manifest",
    "macro_scores",
    "ols_loss",
    "predict",
    "save_bundle",
    "save_manifest",
]
