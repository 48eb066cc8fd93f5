"""Explanations: saliency properties, locality, planted-feature recovery."""

import hashlib
import json

import numpy as np
import pytest

from memefuse import Tensor, TrainConfig, fit
from memefuse.autodiff import concat, pick
from memefuse.data.bundles import EmbeddingBundle, save_bundle
from memefuse.data.manifest import DatasetManifest, ManifestEntry, default_label_map, save_manifest
from memefuse.data.synthetic import class_directions
from memefuse.interpret import explain

D = 16
SIGNAL = 6.0
QUIET = 0.1
DIRECTIONS = class_directions(D, 6, np.random.default_rng(50))


def sparse_bundle(rng, label, bid):
    """One informative f_e patch row; every other row and stream is noise.

    The class signal lives in exactly one patch, which is what the
    saliency trials probe; the non-probed streams stay quiet so they do
    not add irrelevant gradient mass to the patch ranking.
    """
    m = int(rng.integers(3, 7))
    n = int(rng.integers(4, 8))
    planted = int(rng.integers(m))
    f_e = rng.standard_normal((m, D))
    f_e[planted] = SIGNAL * DIRECTIONS[label] + rng.standard_normal(D) * 0.1
    bundle = EmbeddingBundle(
        bid,
        QUIET * rng.standard_normal((m, D)),
        QUIET * rng.standard_normal((n, D)),
        f_e,
        label,
    )
    return bundle, planted


@pytest.fixture(scope="module")
def trained_model(tmp_path_factory):
    out = tmp_path_factory.mktemp("interp_ds")
    (out / "bundles").mkdir()
    gen = np.random.default_rng(99)
    entries = []
    for label in range(6):
        for k in range(20):
            bundle, _ = sparse_bundle(gen, label, f"c{label}-{k:02d}")
            rel = f"bundles/{bundle.id}.emb"
            save_bundle(bundle, out / rel)
            entries.append(ManifestEntry(bundle.id, rel, "train" if k < 16 else "val"))
    manifest = DatasetManifest(D, 6, default_label_map(6), entries, out)
    save_manifest(manifest, out / "manifest.json")
    cfg = TrainConfig(d=D, num_classes=6, epochs=150, loss="ce", lr=2e-3, seed=1, batch_size=16)
    return fit(manifest, cfg).use_final()


def make_bundle(rng, bid="x", m=4, n=5, label=None):
    return EmbeddingBundle(
        bid,
        rng.standard_normal((m, D)),
        rng.standard_normal((n, D)),
        rng.standard_normal((m, D)),
        label,
    )


def test_saliency_nonnegative_finite_and_sized(trained_model):
    rng = np.random.default_rng(0)
    bundle = make_bundle(rng)
    result = explain(trained_model, bundle)
    assert len(result.patch_saliency) == bundle.m
    assert len(result.token_saliency) == bundle.n
    assert len(result.patch_attention) == bundle.m
    assert len(result.token_attention) == bundle.n
    for values in (result.patch_saliency, result.token_saliency,
                   result.patch_attention, result.token_attention):
        arr = np.asarray(values)
        assert np.all(np.isfinite(arr)) and np.all(arr >= 0)


def test_unlabeled_bundles_are_explainable(trained_model):
    bundle = make_bundle(np.random.default_rng(1), label=None)
    result = explain(trained_model, bundle)
    assert 0 <= result.pred < 6
    assert 0 < result.prob <= 1


def test_attention_summary_matches_forward_exactly(trained_model):
    bundle = make_bundle(np.random.default_rng(2))
    out = trained_model.forward_arrays(bundle.f_i, bundle.f_t, bundle.f_e)
    result = explain(trained_model, bundle)
    np.testing.assert_allclose(result.patch_attention, out.att_patch.data.mean(axis=0), atol=1e-9, rtol=0)
    np.testing.assert_allclose(result.token_attention, out.att_text.data.mean(axis=0), atol=1e-9, rtol=0)


def test_explain_never_mutates_parameters(trained_model):
    def checksum():
        h = hashlib.sha256()
        for name, t in trained_model.named_params():
            h.update(name.encode())
            h.update(t.data.tobytes())
        return h.hexdigest()

    before = checksum()
    explain(trained_model, make_bundle(np.random.default_rng(3)))
    assert checksum() == before


def test_detached_patch_has_exactly_zero_saliency(trained_model):
    rng = np.random.default_rng(4)
    bundle = make_bundle(rng, m=5)
    severed = 2

    def split_rows(arr):
        top = Tensor(arr[:severed], requires_grad=True)
        cut = Tensor(arr[severed: severed + 1], requires_grad=False)  # detached row
        bottom = Tensor(arr[severed + 1:], requires_grad=True)
        return top, cut, bottom, concat(concat(top, cut, axis=0), bottom, axis=0)

    i_top, i_cut, i_bottom, f_i = split_rows(bundle.f_i)
    e_top, e_cut, e_bottom, f_e = split_rows(bundle.f_e)
    out = trained_model.forward(f_i, Tensor(bundle.f_t), f_e)
    pick(out.logits, int(np.argmax(out.probs.data))).backward()

    def norms(top, cut, bottom):
        rows = [np.sqrt((g * g).sum(axis=1)) if g is not None else np.zeros(1)
                for g in (top.grad, cut.grad, bottom.grad)]
        return np.concatenate(rows)

    saliency = norms(i_top, i_cut, i_bottom) + norms(e_top, e_cut, e_bottom)
    assert saliency[severed] == 0.0
    assert np.all(saliency[np.arange(5) != severed] > 0)


def test_planted_patch_wins_saliency(trained_model):
    rng = np.random.default_rng(5)
    hits = 0
    trials = 100
    for _ in range(trials):
        label = int(rng.integers(6))
        bundle, planted = sparse_bundle(rng, label, "t")
        result = explain(trained_model, bundle)
        if int(np.argmax(result.patch_saliency)) == planted:
            hits += 1
    assert hits >= 90, f"planted patch won saliency in only {hits}/{trials} trials"


def test_explanation_json_schema(trained_model):
    bundle = make_bundle(np.random.default_rng(6), bid="sample-7")
    doc = json.loads(explain(trained_model, bundle).to_json())
    assert doc["id"] == "sample-7"
    assert set(doc) >= {"id", "pred", "prob", "patch_attention", "token_attention",
                        "patch_saliency", "token_saliency"}
