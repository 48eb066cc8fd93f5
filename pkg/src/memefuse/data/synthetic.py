"""Synthetic embedding-bundle generator.

Stands in for real meme data: every class gets one fixed unit direction
per stream, and sample rows are that direction scaled by the stream's
signal strength plus Gaussian noise.  Setting a strength to zero makes
the stream pure noise, which is how ablation experiments plant signal
in a single stream.  Splits follow 70/15/15 per class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import ConfigError
from .bundles import EmbeddingBundle, save_bundle
from .manifest import DatasetManifest, ManifestEntry, default_label_map, save_manifest


@dataclass
class SynthConfig:
    samples_per_class: int = 20
    d: int = 16
    num_classes: int = 6
    m_range: tuple[int, int] = (3, 6)
    n_range: tuple[int, int] = (4, 8)
    s_e: float = 4.0
    s_t: float = 0.0
    s_i: float = 0.0
    noise: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.samples_per_class < 1:
            raise ConfigError("samples_per_class must be >= 1")
        if self.num_classes < 2:
            raise ConfigError("need at least two classes")
        if self.d < self.num_classes:
            raise ConfigError(
                f"d={self.d} too small to derive {self.num_classes} distinct class directions"
            )
        for name, (lo, hi) in (("m_range", self.m_range), ("n_range", self.n_range)):
            if lo < 1 or hi < lo:
                raise ConfigError(f"{name} must be a nonempty range of positive ints, got ({lo}, {hi})")
        if self.noise <= 0:
            raise ConfigError("noise must be > 0")
        if min(self.s_e, self.s_t, self.s_i) < 0:
            raise ConfigError("signal strengths must be >= 0")


def class_directions(d: int, num_classes: int, rng: np.random.Generator) -> np.ndarray:
    """num_classes mutually orthogonal unit vectors in R^d."""
    basis, _ = np.linalg.qr(rng.standard_normal((d, num_classes)))
    return basis.T


def split_counts(n: int) -> tuple[int, int, int]:
    """70/15/15 per class, keeping every split nonempty."""
    n_val = max(1, round(0.15 * n))
    n_test = max(1, round(0.15 * n))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise ConfigError(f"samples_per_class={n} too small to fill all three splits")
    return n_train, n_val, n_test


def generate_synthetic(cfg: SynthConfig, out_dir) -> DatasetManifest:
    """Write bundles plus manifest.json under out_dir; returns the manifest."""
    cfg.validate()
    out_dir = Path(out_dir)
    (out_dir / "bundles").mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(cfg.seed)
    dirs = {stream: class_directions(cfg.d, cfg.num_classes, rng) for stream in ("e", "t", "i")}
    label_map = default_label_map(cfg.num_classes)
    names = {i: name for name, i in label_map.items()}

    n_train, n_val, n_test = split_counts(cfg.samples_per_class)
    split_of = ["train"] * n_train + ["val"] * n_val + ["test"] * n_test

    entries = []
    for label in range(cfg.num_classes):
        for k in range(cfg.samples_per_class):
            m = int(rng.integers(cfg.m_range[0], cfg.m_range[1] + 1))
            n = int(rng.integers(cfg.n_range[0], cfg.n_range[1] + 1))
            f_i = cfg.s_i * dirs["i"][label] + cfg.noise * rng.standard_normal((m, cfg.d))
            f_t = cfg.s_t * dirs["t"][label] + cfg.noise * rng.standard_normal((n, cfg.d))
            f_e = cfg.s_e * dirs["e"][label] + cfg.noise * rng.standard_normal((m, cfg.d))
            bundle_id = f"{names[label]}-{k:04d}"
            rel_path = f"bundles/{bundle_id}.emb"
            save_bundle(EmbeddingBundle(bundle_id, f_i, f_t, f_e, label), out_dir / rel_path)
            entries.append(ManifestEntry(bundle_id, rel_path, split_of[k]))

    manifest = DatasetManifest(
        d=cfg.d, num_classes=cfg.num_classes, label_map=label_map, entries=entries, root=out_dir
    )
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest


def nearest_mean_accuracy(manifest: DatasetManifest, stream: str = "f_e",
                          train_split: str = "train", eval_split: str = "test") -> float:
    """Accuracy of a nearest-class-mean classifier on one stream's row means.

    Deliberately bypasses the model: this is the independent check that
    a generated dataset actually carries learnable class signal.
    """
    def row_means(split):
        pairs = []
        for b in manifest.load_split(split):
            pairs.append((getattr(b, stream).mean(axis=0), b.label))
        return pairs

    means = np.zeros((manifest.num_classes, manifest.d))
    counts = np.zeros(manifest.num_classes)
    for vec, label in row_means(train_split):
        means[label] += vec
        counts[label] += 1
    if np.any(counts == 0):
        raise ConfigError("every class needs at least one training sample")
    means /= counts[:, None]

    hits = 0
    pairs = row_means(eval_split)
    for vec, label in pairs:
        if int(np.argmin(((means - vec) ** 2).sum(axis=1))) == label:
            hits += 1
    return hits / len(pairs)
