"""Ablation harness: train selected variants across seeds, compare metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .data.manifest import DatasetManifest
from .exceptions import ConfigError, MemefuseError
from .train import TrainConfig, evaluate, fit


@dataclass
class AblationRun:
    variant: str
    seed: int
    macro_f1: float
    accuracy: float
    per_class_f1: list[float]

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "seed": self.seed,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "per_class_f1": self.per_class_f1,
        }


@dataclass
class AblationTable:
    runs: list[AblationRun]

    def summary(self) -> dict[str, dict[str, float]]:
        """Per-variant mean and std of macro-F1 and accuracy."""
        out: dict[str, dict[str, float]] = {}
        for variant in dict.fromkeys(run.variant for run in self.runs):
            f1s = [r.macro_f1 for r in self.runs if r.variant == variant]
            accs = [r.accuracy for r in self.runs if r.variant == variant]
            out[variant] = {
                "macro_f1_mean": float(np.mean(f1s)),
                "macro_f1_std": float(np.std(f1s)),
                "accuracy_mean": float(np.mean(accs)),
                "accuracy_std": float(np.std(accs)),
                "runs": len(f1s),
            }
        return out

    def to_json(self) -> str:
        doc = {"runs": [r.to_dict() for r in self.runs], "summary": self.summary()}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"{'variant':<14}{'macro_f1':>18}{'accuracy':>18}{'runs':>6}"]
        for variant, row in self.summary().items():
            lines.append(
                f"{variant:<14}"
                f"{row['macro_f1_mean']:>10.4f} ±{row['macro_f1_std']:.4f}"
                f"{row['accuracy_mean']:>10.4f} ±{row['accuracy_std']:.4f}"
                f"{row['runs']:>6}"
            )
        return "\n".join(lines) + "\n"


def run_ablation(manifest: DatasetManifest, variants: list[str], seeds: list[int],
                 base_cfg: TrainConfig, eval_split: str = "test") -> AblationTable:
    """Train every (variant, seed) pair with identical data order.

    The shuffle is keyed by the shared seed, so variants see the same
    sample order; only the parameter draw differs between variants.
    Evaluation uses the best-validation checkpoint of each run.
    """
    if not seeds:
        raise ConfigError("need at least one seed")
    if not variants:
        raise ConfigError("need at least one variant")
    runs = []
    for variant in variants:
        for seed in seeds:
            cfg = replace(base_cfg, variant=variant, seed=seed)
            try:
                result = fit(manifest, cfg)
                report = evaluate(result.use_best(), manifest, eval_split)
            except MemefuseError as exc:
                raise type(exc)(f"variant {variant!r}, seed {seed}: {exc}") from exc
            runs.append(
                AblationRun(
                    variant=variant,
                    seed=seed,
                    macro_f1=report.macro_f1,
                    accuracy=report.accuracy,
                    per_class_f1=report.per_class_f1,
                )
            )
    return AblationTable(runs)
