"""Embedding-bundle data layer: file formats, manifests, batching, synthesis."""

from .batching import batch_iter, epoch_order
from .bundles import MAGIC, UNLABELED, VERSION, EmbeddingBundle, load_bundle, save_bundle
from .manifest import (
    EKMAN_LABELS,
    DatasetManifest,
    ManifestEntry,
    default_label_map,
    load_manifest,
    save_manifest,
)
from .synthetic import SynthConfig, class_directions, generate_synthetic, nearest_mean_accuracy

__all__ = [
    "EKMAN_LABELS",
    "MAGIC",
    "UNLABELED",
    "VERSION",
    "DatasetManifest",
    "EmbeddingBundle",
    "ManifestEntry",
    "SynthConfig",
    "batch_iter",
    "class_directions",
    "default_label_map",
    "epoch_order",
    "generate_synthetic",
    "load_bundle",
    "load_manifest",
    "nearest_mean_accuracy",
    "save_bundle",
    "save_manifest",
]
