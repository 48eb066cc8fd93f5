"""Ablation harness behavior and the zero-signal sanity bound."""

import json

import numpy as np
import pytest

from memefuse import SynthConfig, TrainConfig, evaluate, fit, generate_synthetic
from memefuse.ablation import run_ablation
from memefuse.exceptions import ConfigError
from memefuse.models import VARIANTS


@pytest.fixture(scope="module")
def signal_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("abl_sig")
    return generate_synthetic(SynthConfig(samples_per_class=10, d=8, s_e=3.0, seed=60), out)


def test_single_variant_single_seed_reduces_to_one_evaluation(signal_dataset):
    cfg = TrainConfig(d=8, num_classes=6, epochs=2, loss="ce", lr=1e-3, seed=3)
    table = run_ablation(signal_dataset, ["full"], [3], cfg)
    assert len(table.runs) == 1
    direct = fit(signal_dataset, cfg)
    report = evaluate(direct.use_best(), signal_dataset, "test")
    assert table.runs[0].macro_f1 == pytest.approx(report.macro_f1, abs=1e-12)
    assert table.runs[0].accuracy == pytest.approx(report.accuracy, abs=1e-12)


def test_identical_seeds_identical_table(signal_dataset):
    cfg = TrainConfig(d=8, num_classes=6, epochs=2, loss="ce", lr=1e-3)
    a = run_ablation(signal_dataset, ["full", "text_only"], [0, 1], cfg)
    b = run_ablation(signal_dataset, ["full", "text_only"], [0, 1], cfg)
    assert a.to_json() == b.to_json()


def test_report_schema(signal_dataset):
    cfg = TrainConfig(d=8, num_classes=6, epochs=1, loss="ce")
    table = run_ablation(signal_dataset, ["early_fusion"], [0, 1], cfg)
    doc = json.loads(table.to_json())
    assert sorted(doc["runs"][0]) == ["accuracy", "macro_f1", "per_class_f1", "seed", "variant"]
    assert doc["summary"]["early_fusion"]["runs"] == 2
    assert "early_fusion" in table.to_text()


def test_empty_specs_rejected(signal_dataset):
    cfg = TrainConfig(d=8, num_classes=6, epochs=1)
    with pytest.raises(ConfigError):
        run_ablation(signal_dataset, [], [0], cfg)
    with pytest.raises(ConfigError):
        run_ablation(signal_dataset, ["full"], [], cfg)


def test_zero_signal_no_variant_beats_chance(tmp_path):
    """Mean test accuracy over 5 seeds stays within 3 stderr of 1/C for
    every variant when the data carries no class signal."""
    cfg = SynthConfig(samples_per_class=30, d=8, s_e=0.0, s_t=0.0, s_i=0.0, noise=1.0, seed=61)
    manifest = generate_synthetic(cfg, tmp_path)
    n_test = len(manifest.split_entries("test"))
    tc = TrainConfig(d=8, num_classes=6, epochs=3, loss="ce", lr=1e-3)
    table = run_ablation(manifest, list(VARIANTS), [0, 1, 2, 3, 4], tc)
    # mean over 5 seeds: stderr shrinks by sqrt(5)
    bound = 1 / 6 + 3 * np.sqrt((1 / 6) * (5 / 6) / (n_test * 5))
    for variant, row in table.summary().items():
        assert row["accuracy_mean"] <= bound, (
            f"{variant}: mean accuracy {row['accuracy_mean']:.3f} exceeds chance bound {bound:.3f}"
        )
