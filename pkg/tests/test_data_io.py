"""Bundle files, manifests, the synthetic generator, and batching."""

import numpy as np
import pytest

from memefuse.data import (
    EmbeddingBundle,
    SynthConfig,
    batch_iter,
    generate_synthetic,
    load_bundle,
    load_manifest,
    nearest_mean_accuracy,
    save_bundle,
)
from memefuse.data.synthetic import class_directions, split_counts
from memefuse.exceptions import (
    BadMagicError,
    ConfigError,
    ContractError,
    DimensionError,
    FormatError,
    TruncatedError,
    VersionError,
)


def rand_bundle(rng, m=3, n=4, d=5, label=2, bid="b0"):
    return EmbeddingBundle(
        bid,
        rng.standard_normal((m, d)),
        rng.standard_normal((n, d)),
        rng.standard_normal((m, d)),
        label,
    )


class TestBundleFormat:
    def test_tiny_roundtrip_exact(self, tmp_path):
        b = EmbeddingBundle("t", [[1.0, 2.0]], [[-0.5, 0.25]], [[4.0, -8.0]], 3)
        path = tmp_path / "t.emb"
        save_bundle(b, path)
        back = load_bundle(path)
        np.testing.assert_array_equal(back.f_i, b.f_i)
        np.testing.assert_array_equal(back.f_t, b.f_t)
        np.testing.assert_array_equal(back.f_e, b.f_e)
        assert back.label == 3 and back.id == "t"

    def test_unlabeled_roundtrip(self, tmp_path):
        b = EmbeddingBundle("u", [[1.0]], [[2.0]], [[3.0]], None)
        save_bundle(b, tmp_path / "u.emb")
        assert load_bundle(tmp_path / "u.emb").label is None

    def test_corrupted_magic(self, tmp_path):
        path = tmp_path / "bad.emb"
        save_bundle(rand_bundle(np.random.default_rng(0)), path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(BadMagicError):
            load_bundle(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "v.emb"
        save_bundle(rand_bundle(np.random.default_rng(1)), path)
        raw = bytearray(path.read_bytes())
        raw[8] = 9
        path.write_bytes(bytes(raw))
        with pytest.raises(VersionError):
            load_bundle(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "tr.emb"
        save_bundle(rand_bundle(np.random.default_rng(2)), path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 7])
        with pytest.raises(TruncatedError):
            load_bundle(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "tg.emb"
        save_bundle(rand_bundle(np.random.default_rng(3)), path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(DimensionError):
            load_bundle(path)

    def test_header_shorter_than_fixed_size(self, tmp_path):
        path = tmp_path / "short.emb"
        path.write_bytes(b"MOODEMB1\x01")
        with pytest.raises(TruncatedError):
            load_bundle(path)

    def test_roundtrip_drift_is_single_precision_rounding(self, tmp_path):
        rng = np.random.default_rng(4)
        for i in range(1000):
            m, n, d = rng.integers(1, 5), rng.integers(1, 5), rng.integers(1, 6)
            b = rand_bundle(rng, m, n, d, int(rng.integers(6)), f"r{i}")
            path = tmp_path / "r.emb"
            save_bundle(b, path)
            back = load_bundle(path)
            for name in ("f_i", "f_t", "f_e"):
                want = getattr(b, name).astype("<f4").astype(np.float64)
                np.testing.assert_array_equal(getattr(back, name), want)

    def test_invariant_violations_rejected(self):
        with pytest.raises(DimensionError):
            EmbeddingBundle("x", np.zeros((2, 3)), np.zeros((2, 3)), np.zeros((3, 3)), 0)
        with pytest.raises(DimensionError):
            EmbeddingBundle("x", np.zeros((2, 3)), np.zeros((2, 4)), np.zeros((2, 3)), 0)
        with pytest.raises(DimensionError):
            EmbeddingBundle("x", np.full((1, 2), np.nan), np.zeros((1, 2)), np.zeros((1, 2)), 0)


class TestSyntheticGenerator:
    def test_same_seed_identical_files(self, tmp_path):
        cfg = SynthConfig(samples_per_class=8, d=8, seed=42)
        generate_synthetic(cfg, tmp_path / "a")
        generate_synthetic(cfg, tmp_path / "b")
        files_a = sorted((tmp_path / "a").rglob("*"))
        files_b = sorted((tmp_path / "b").rglob("*"))
        assert [f.name for f in files_a] == [f.name for f in files_b]
        for fa, fb in zip(files_a, files_b):
            if fa.is_file() and fa.name != "config.json":
                assert fa.read_bytes() == fb.read_bytes(), fa.name

    def test_planted_emotion_signal_is_learnable(self, tmp_path):
        cfg = SynthConfig(samples_per_class=20, d=16, s_e=4.0, noise=1.0, seed=7)
        manifest = generate_synthetic(cfg, tmp_path)
        assert nearest_mean_accuracy(manifest, "f_e") >= 0.95

    def test_zero_signal_is_chance_level(self, tmp_path):
        cfg = SynthConfig(samples_per_class=40, d=8, s_e=0.0, s_t=0.0, s_i=0.0, seed=8)
        manifest = generate_synthetic(cfg, tmp_path)
        n_test = len(manifest.split_entries("test"))
        stderr = np.sqrt((1 / 6) * (5 / 6) / n_test)
        assert nearest_mean_accuracy(manifest, "f_e") <= 1 / 6 + 3 * stderr

    def test_directions_are_distinct_unit_vectors(self):
        dirs = class_directions(16, 6, np.random.default_rng(9))
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0, atol=1e-12)
        gram = np.abs(dirs @ dirs.T - np.eye(6))
        assert gram.max() < 1e-10

    def test_class_means_converge_to_planted_direction(self, tmp_path):
        cfg = SynthConfig(samples_per_class=60, d=8, s_e=3.0, noise=1.0, seed=10, m_range=(4, 6))
        manifest = generate_synthetic(cfg, tmp_path)
        dirs = class_directions(cfg.d, cfg.num_classes, np.random.default_rng(cfg.seed))
        sums = np.zeros((6, cfg.d))
        counts = np.zeros(6)
        for split in ("train", "val", "test"):
            for b in manifest.load_split(split):
                sums[b.label] += b.f_e.mean(axis=0)
                counts[b.label] += 1
        means = sums / counts[:, None]
        for label in range(6):
            tol = 3 * cfg.noise / np.sqrt(counts[label])
            err = np.linalg.norm(means[label] - cfg.s_e * dirs[label]) / np.sqrt(cfg.d)
            assert err < tol

    def test_split_proportions(self):
        assert split_counts(20) == (14, 3, 3)
        assert split_counts(28) == (20, 4, 4)
        with pytest.raises(ConfigError):
            split_counts(2)

    def test_d_smaller_than_classes_rejected(self):
        with pytest.raises(ConfigError):
            SynthConfig(d=4, num_classes=6).validate()

    def test_loaded_bundles_revalidate_against_manifest(self, tmp_path):
        cfg = SynthConfig(samples_per_class=8, d=8, seed=11)
        generate_synthetic(cfg, tmp_path)
        manifest = load_manifest(tmp_path / "manifest.json")
        assert manifest.d == 8 and manifest.num_classes == 6
        train = manifest.load_split("train")
        assert all(b.d == 8 for b in train)

    def test_missing_bundle_file_rejected(self, tmp_path):
        cfg = SynthConfig(samples_per_class=8, d=8, seed=12)
        manifest = generate_synthetic(cfg, tmp_path)
        (tmp_path / manifest.entries[0].path).unlink()
        with pytest.raises(FormatError):
            load_manifest(tmp_path / "manifest.json")


class TestBatching:
    def _samples(self, count):
        rng = np.random.default_rng(13)
        return [rand_bundle(rng, bid=f"s{i}") for i in range(count)]

    def test_small_split_gives_single_batch(self):
        batches = list(batch_iter(self._samples(10), 32, seed=0))
        assert len(batches) == 1 and len(batches[0]) == 10

    def test_same_seed_epoch_identical_order(self):
        samples = self._samples(20)
        a = [b.id for batch in batch_iter(samples, 6, seed=5, epoch=3) for b in batch]
        b = [b.id for batch in batch_iter(samples, 6, seed=5, epoch=3) for b in batch]
        assert a == b
        c = [b.id for batch in batch_iter(samples, 6, seed=5, epoch=4) for b in batch]
        assert a != c

    def test_union_is_exact_multiset(self):
        samples = self._samples(23)
        for epoch in range(5):
            ids = [b.id for batch in batch_iter(samples, 7, seed=1, epoch=epoch) for b in batch]
            assert sorted(ids) == sorted(s.id for s in samples)

    def test_partial_batch_kept(self):
        batches = list(batch_iter(self._samples(10), 4, seed=0))
        assert [len(b) for b in batches] == [4, 4, 2]

    def test_empty_split_rejected(self):
        with pytest.raises(ContractError):
            list(batch_iter([], 4, seed=0))
