"""Training and evaluation loops.

Batches accumulate per-sample gradients (samples keep native patch and
token counts), the loss is mean-reduced over the batch, and one Adam
step follows each batch.  Validation macro-F1 is tracked every epoch
and the best-scoring parameters are retained alongside the final ones.
Runs are fully deterministic under their seed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import autodiff as ad
from .data.batching import batch_iter
from .data.manifest import DatasetManifest
from .exceptions import ConfigError, ContractError, NumericsError
from .head import predict
from .losses import DEFAULT_HARD_WEIGHT, DEFAULT_SMOOTHING, OLSState, ce_loss, ols_loss
from .metrics import MetricsReport, confusion_matrix, macro_scores
from .models import Model, VARIANTS, build_variant
from .params import SCORE_MODES

LOSSES = ("ce", "ols")


@dataclass
class TrainConfig:
    d: int = 768
    num_classes: int = 6
    lr: float = 1e-4
    batch_size: int = 32
    epochs: int = 30
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    loss: str = "ols"
    score_mode: str = "bimodal"
    variant: str = "full"
    ols_smoothing: float = DEFAULT_SMOOTHING
    ols_hard_weight: float = DEFAULT_HARD_WEIGHT

    def validate(self) -> None:
        if min(self.d, self.num_classes, self.batch_size) < 1 or self.epochs < 0:
            raise ConfigError("d, num_classes, batch_size must be >= 1 and epochs >= 0")
        if self.lr <= 0 or self.adam_eps <= 0:
            raise ConfigError("lr and adam_eps must be positive")
        if not 0 < self.beta1 < 1 or not 0 < self.beta2 < 1:
            raise ConfigError("Adam betas must lie in (0, 1)")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.score_mode not in SCORE_MODES:
            raise ConfigError(f"score_mode must be one of {SCORE_MODES}, got {self.score_mode!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class FitResult:
    model: Model
    best_state: dict[str, np.ndarray]
    final_state: dict[str, np.ndarray]
    history: list[dict]
    best_epoch: int = -1
    best_val_f1: float = 0.0

    def use_best(self) -> Model:
        _load_state(self.model, self.best_state)
        return self.model

    def use_final(self) -> Model:
        _load_state(self.model, self.final_state)
        return self.model


def _snapshot(model: Model) -> dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in model.named_params()}


def _load_state(model: Model, state: dict[str, np.ndarray]) -> None:
    for name, t in model.named_params():
        t.data[...] = state[name]


def sample_loss(model: Model, bundle, loss_kind: str, ols_state: OLSState | None):
    """Forward one sample; returns (loss tensor, probs array, prediction)."""
    out = model.forward_arrays(bundle.f_i, bundle.f_t, bundle.f_e)
    if bundle.label is None:
        raise ContractError(f"sample {bundle.id} is unlabeled; cannot train on it")
    if loss_kind == "ols":
        loss = ols_loss(out.logits, bundle.label, ols_state)
    else:
        loss = ce_loss(out.logits, bundle.label)
    probs = out.probs.data.copy()
    return loss, probs, predict(probs)


def evaluate_model(model: Model, samples, class_names: list[str] | None = None) -> MetricsReport:
    """Metrics of a model over labeled samples (deterministic order)."""
    truth, pred = [], []
    for bundle in samples:
        out = model.forward_arrays(bundle.f_i, bundle.f_t, bundle.f_e)
        truth.append(bundle.label)
        pred.append(predict(out.probs.data))
    return macro_scores(confusion_matrix(truth, pred, model.num_classes), class_names)


def evaluate(model: Model, manifest: DatasetManifest, split: str = "test") -> MetricsReport:
    names = [manifest.class_name(i) for i in range(manifest.num_classes)]
    samples = manifest.load_split(split)
    if not samples:
        raise ConfigError(f"split {split!r} is empty")
    return evaluate_model(model, samples, names)


def fit(manifest: DatasetManifest, cfg: TrainConfig, model: Model | None = None) -> FitResult:
    """Train a model on the manifest's train split, validating per epoch."""
    from .optim import AdamState, adam_step

    cfg.validate()
    if manifest.d != cfg.d:
        raise ConfigError(f"config d={cfg.d} but dataset declares d={manifest.d}")
    if manifest.num_classes != cfg.num_classes:
        raise ConfigError(
            f"config num_classes={cfg.num_classes} but dataset declares {manifest.num_classes}"
        )
    train = manifest.load_split("train")
    val = manifest.load_split("val")
    if not train or not val:
        raise ConfigError("train and val splits must both be nonempty")
    class_names = [manifest.class_name(i) for i in range(manifest.num_classes)]

    if model is None:
        model = build_variant(cfg.variant, cfg.d, cfg.num_classes, cfg.score_mode, cfg.seed)
    adam = AdamState(model.named_params(), cfg.beta1, cfg.beta2, cfg.adam_eps)
    ols_state = OLSState(cfg.num_classes, cfg.ols_smoothing, cfg.ols_hard_weight) if cfg.loss == "ols" else None

    history: list[dict] = []
    best_state = _snapshot(model)
    best_f1 = -1.0
    best_epoch = -1

    for epoch in range(cfg.epochs):
        epoch_loss = 0.0
        seen = 0
        for batch in batch_iter(train, cfg.batch_size, cfg.seed, epoch):
            model.zero_grad()
            inv = 1.0 / len(batch)
            for bundle in batch:
                try:
                    loss, probs, _ = sample_loss(model, bundle, cfg.loss, ols_state)
                except NumericsError as exc:
                    raise NumericsError(
                        f"non-finite loss at epoch {epoch}, sample {bundle.id}: {exc}"
                    ) from exc
                if ols_state is not None:
                    ols_state.observe(probs, bundle.label)
                epoch_loss += loss.item()
                seen += 1
                ad.scale(loss, inv).backward()
            adam_step(model.named_params(), adam, cfg.lr)
        if ols_state is not None:
            ols_state.epoch_end()

        report = evaluate_model(model, val, class_names)
        history.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / max(seen, 1),
                "val_macro_f1": report.macro_f1,
                "val_accuracy": report.accuracy,
            }
        )
        if report.macro_f1 > best_f1:
            best_f1 = report.macro_f1
            best_epoch = epoch
            best_state = _snapshot(model)

    return FitResult(
        model=model,
        best_state=best_state,
        final_state=_snapshot(model),
        history=history,
        best_epoch=best_epoch,
        best_val_f1=max(best_f1, 0.0),
    )
