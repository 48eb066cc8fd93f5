"""Command-line interface.

Subcommands: synth, train, eval, gradcheck, ablate, explain.  Options
can come from a JSON config file (--config); explicit flags win.  Every
command that writes an output directory echoes its effective config
there, so a run can be reproduced from its artifacts alone.  Exit
codes: 0 success, 1 runtime failure (one-line diagnostic on stderr),
2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ablation import run_ablation
from .autodiff import Tensor
from .backends import backend_name
from .checkpoint import load_model, save_model
from .data import SynthConfig, generate_synthetic, load_manifest
from .exceptions import ConfigError, MemefuseError
from .gradcheck import grad_check
from .interpret import explain
from .losses import OLSState, ce_loss, ols_loss
from .models import VARIANTS, build_variant
from .params import SCORE_MODES
from .train import LOSSES, TrainConfig, evaluate, fit


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with defaults for this command")
    p.add_argument("--seed", type=int)
    p.add_argument("--dim", type=int, help="embedding dimension d")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memefuse", description=__doc__)
    parser.add_argument("--version", action="version", version=f"memefuse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic embedding dataset")
    _add_common(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--classes", type=int)
    p.add_argument("--per-class", type=int)
    p.add_argument("--m-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--n-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--s-e", type=float, help="emotion-stream signal strength")
    p.add_argument("--s-t", type=float, help="text-stream signal strength")
    p.add_argument("--s-i", type=float, help="image-stream signal strength")
    p.add_argument("--noise", type=float)

    p = sub.add_parser("train", help="train a model on a dataset manifest")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True, help="manifest.json path")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--loss", choices=LOSSES)
    p.add_argument("--score-mode", choices=SCORE_MODES)
    p.add_argument("--variant", choices=VARIANTS)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--out", type=Path)
    p.add_argument("--report", choices=("json", "text"), default="text")

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model")
    _add_common(p)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--classes", type=int, default=6)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--loss", choices=LOSSES, help="check only this loss")
    p.add_argument("--score-mode", choices=SCORE_MODES, help="check only this score mode")

    p = sub.add_parser("ablate", help="train and compare model variants")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--variants", default="full,no_emo,no_gmf,dca")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--loss", choices=LOSSES)
    p.add_argument("--score-mode", choices=SCORE_MODES)
    p.add_argument("--report", choices=("json", "text"), default="text")

    p = sub.add_parser("explain", help="attention and saliency for one sample")
    _add_common(p)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--id", required=True, help="sample id from the manifest")
    p.add_argument("--out", type=Path, help="output JSON file (default stdout)")

    return parser


def _merge_config(args: argparse.Namespace, keys: list[str]) -> dict:
    """File values for known keys, overridden by explicitly set flags."""
    merged: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                merged.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(merged) - set(keys)
        if unknown:
            raise ConfigError(f"config {args.config} has unknown keys: {sorted(unknown)}")
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _echo_config(out_dir: Path, command: str, cfg: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"command": command, "backend": backend_name(), "version": __version__, **cfg}
    with open(out_dir / "config.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def cmd_synth(args) -> int:
    merged = _merge_config(args, ["seed", "dim", "classes", "per_class", "m_range",
                                  "n_range", "s_e", "s_t", "s_i", "noise"])
    cfg = SynthConfig(
        samples_per_class=merged.get("per_class", 20),
        d=merged.get("dim", 16),
        num_classes=merged.get("classes", 6),
        m_range=tuple(merged.get("m_range", (3, 6))),
        n_range=tuple(merged.get("n_range", (4, 8))),
        s_e=merged.get("s_e", 4.0),
        s_t=merged.get("s_t", 0.0),
        s_i=merged.get("s_i", 0.0),
        noise=merged.get("noise", 1.0),
        seed=merged.get("seed", 0),
    )
    cfg.validate()
    _echo_config(args.out, "synth", cfg.__dict__)
    manifest = generate_synthetic(cfg, args.out)
    print(f"wrote {len(manifest.entries)} bundles to {args.out}")
    return 0


def _train_config(args, manifest) -> TrainConfig:
    merged = _merge_config(args, ["seed", "dim", "epochs", "lr", "batch_size",
                                  "loss", "score_mode", "variant"])
    cfg = TrainConfig(
        d=merged.get("dim", manifest.d),
        num_classes=manifest.num_classes,
        lr=merged.get("lr", TrainConfig.lr),
        batch_size=merged.get("batch_size", TrainConfig.batch_size),
        epochs=merged.get("epochs", TrainConfig.epochs),
        seed=merged.get("seed", 0),
        loss=merged.get("loss", TrainConfig.loss),
        score_mode=merged.get("score_mode", TrainConfig.score_mode),
        variant=merged.get("variant", TrainConfig.variant),
    )
    cfg.validate()
    return cfg


def cmd_train(args) -> int:
    manifest = load_manifest(args.data)
    cfg = _train_config(args, manifest)
    _echo_config(args.out, "train", {**cfg.to_dict(), "data": str(args.data)})
    result = fit(manifest, cfg)
    save_model(result.use_best(), args.out / "model.ckpt")
    with open(args.out / "history.jsonl", "w") as fh:
        for row in result.history:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    last = result.history[-1] if result.history else {}
    print(
        f"trained {cfg.variant} for {cfg.epochs} epochs; "
        f"best val macro-F1 {result.best_val_f1:.4f} at epoch {result.best_epoch}; "
        f"final train loss {last.get('train_loss', float('nan')):.4f}"
    )
    print(f"checkpoint: {args.out / 'model.ckpt'}")
    return 0


def cmd_eval(args) -> int:
    manifest = load_manifest(args.data)
    model = load_model(args.model)
    report = evaluate(model, manifest, args.split)
    rendered = report.to_json() if args.report == "json" else report.to_text()
    if args.out is not None:
        _echo_config(args.out, "eval", {"data": str(args.data), "model": str(args.model),
                                        "split": args.split})
        suffix = "json" if args.report == "json" else "txt"
        with open(args.out / f"metrics.{suffix}", "w") as fh:
            fh.write(rendered)
    sys.stdout.write(rendered)
    return 0


def cmd_gradcheck(args) -> int:
    d = args.dim if args.dim is not None else 8
    seed = args.seed if args.seed is not None else 0
    rng = np.random.default_rng(seed)
    f_i = rng.standard_normal((args.m, d))
    f_t = rng.standard_normal((args.n, d))
    f_e = rng.standard_normal((args.m, d))
    losses = [args.loss] if args.loss else list(LOSSES)
    modes = [args.score_mode] if args.score_mode else list(SCORE_MODES)

    worst = 0.0
    failed = []
    for mode in modes:
        for loss_kind in losses:
            model = build_variant("full", d, args.classes, mode, seed)
            params = dict(model.named_params())
            ols_state = OLSState(args.classes) if loss_kind == "ols" else None

            def run(_, model=model, loss_kind=loss_kind, ols_state=ols_state):
                out = model.forward(Tensor(f_i), Tensor(f_t), Tensor(f_e))
                if loss_kind == "ols":
                    return ols_loss(out.logits, 1, ols_state)
                return ce_loss(out.logits, 1)

            report = grad_check(run, params, eps=args.eps, tol=args.tol)
            worst = max(worst, report.worst)
            failed += [f"{mode}/{loss_kind}/{name}" for name in report.failures]
            print(f"  score_mode={mode} loss={loss_kind}: {report.summary()}")

    if failed:
        print(f"FAIL, worst rel err {worst:.3e} > tol {args.tol:.1e}")
        return 1
    print(f"PASS, worst rel err {worst:.3e} < tol {args.tol:.1e}")
    return 0


def cmd_ablate(args) -> int:
    manifest = load_manifest(args.data)
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
    cfg = _train_config(args, manifest)
    _echo_config(args.out, "ablate", {**cfg.to_dict(), "variants": variants, "seeds": seeds,
                                      "data": str(args.data)})
    table = run_ablation(manifest, variants, seeds, cfg)
    with open(args.out / "ablation.json", "w") as fh:
        fh.write(table.to_json())
    with open(args.out / "ablation.txt", "w") as fh:
        fh.write(table.to_text())
    sys.stdout.write(table.to_text() if args.report == "text" else table.to_json())
    return 0


def cmd_explain(args) -> int:
    manifest = load_manifest(args.data)
    model = load_model(args.model)
    entry = next((e for e in manifest.entries if e.id == args.id), None)
    if entry is None:
        raise ConfigError(f"sample id {args.id!r} not present in {args.data}")
    from .data.bundles import load_bundle

    bundle = load_bundle(manifest.root / entry.path, bundle_id=entry.id)
    names = [manifest.class_name(i) for i in range(manifest.num_classes)]
    result = explain(model, bundle, names)
    if args.out is not None:
        with open(args.out, "w") as fh:
            fh.write(result.to_json())
    else:
        sys.stdout.write(result.to_json())
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "gradcheck": cmd_gradcheck,
    "ablate": cmd_ablate,
    "explain": cmd_explain,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (MemefuseError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
