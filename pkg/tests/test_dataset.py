"""TDAE file format round trips, corruption handling, synthetic generation."""
import struct

import numpy as np
import pytest

from tda.dataset import MAGIC, EmbeddingDataset, read_dataset, write_dataset
from tda.errors import CorruptDataset, InvalidFeature, UnsupportedFormat
from tda.synth import SynthShiftSpec, generate_synthetic

from oracles import offline_zero_shot_accuracy


def small_dataset(rng, n=3, d=6, s=5, unlabeled=0):
    head = rng.standard_normal((n, d))
    feats = rng.standard_normal((s, d))
    labels = rng.integers(0, n, size=s).astype(np.int32)
    labels[:unlabeled] = -1
    return EmbeddingDataset(
        class_names=[f"class {i} é" for i in range(n)],
        head=head,
        features=feats,
        labels=labels,
    )


class TestRoundTrip:
    def test_small_dataset_field_for_field(self, tmp_path, rng=None):
        rng = np.random.default_rng(0)
        ds = small_dataset(rng)
        path = tmp_path / "ds.tdae"
        write_dataset(ds, path)
        back = read_dataset(path)
        assert back.class_names == ds.class_names
        np.testing.assert_array_equal(back.labels, ds.labels)
        np.testing.assert_array_equal(back.head, ds.head)
        np.testing.assert_array_equal(back.features, ds.features)

    def test_random_round_trips(self, tmp_path):
        rng = np.random.default_rng(1)
        for i in range(10):
            ds = small_dataset(
                rng,
                n=int(rng.integers(2, 9)),
                d=int(rng.integers(2, 17)),
                s=int(rng.integers(0, 40)),
                unlabeled=int(rng.integers(0, 3)),
            )
            path = tmp_path / f"ds{i}.tdae"
            write_dataset(ds, path)
            back = read_dataset(path)
            np.testing.assert_array_equal(back.features, ds.features)
            np.testing.assert_array_equal(back.head, ds.head)
            np.testing.assert_array_equal(back.labels, ds.labels)
            assert back.class_names == ds.class_names

    def test_loaded_rows_unit_norm(self, tmp_path):
        rng = np.random.default_rng(2)
        ds = small_dataset(rng, s=20)
        path = tmp_path / "ds.tdae"
        write_dataset(ds, path)
        back = read_dataset(path)
        np.testing.assert_allclose(np.linalg.norm(back.features, axis=1), 1.0, atol=1e-3)
        np.testing.assert_allclose(np.linalg.norm(back.head, axis=1), 1.0, atol=1e-3)


class TestCorruption:
    def _write(self, tmp_path):
        rng = np.random.default_rng(3)
        ds = small_dataset(rng)
        path = tmp_path / "ds.tdae"
        write_dataset(ds, path)
        return path

    def test_bad_magic(self, tmp_path):
        path = self._write(tmp_path)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedFormat):
            read_dataset(path)

    def test_bad_version(self, tmp_path):
        path = self._write(tmp_path)
        data = bytearray(path.read_bytes())
        data[4:8] = struct.pack("<I", 99)
        path.write_bytes(bytes(data))
        with pytest.raises(UnsupportedFormat, match="version 99"):
            read_dataset(path)

    def test_truncated_mid_record_names_index(self, tmp_path):
        path = self._write(tmp_path)
        data = path.read_bytes()
        # Cut into the middle of the last record's feature payload.
        path.write_bytes(data[:-10])
        with pytest.raises(CorruptDataset, match="record 4"):
            read_dataset(path)

    def test_truncated_header(self, tmp_path):
        path = self._write(tmp_path)
        path.write_bytes(path.read_bytes()[:9])
        with pytest.raises(CorruptDataset, match="truncated"):
            read_dataset(path)

    def test_nan_payload_names_record(self, tmp_path):
        rng = np.random.default_rng(4)
        ds = small_dataset(rng, n=3, d=4, s=3)
        path = tmp_path / "ds.tdae"
        write_dataset(ds, path)
        data = bytearray(path.read_bytes())
        # Poison record 1's first feature float (label i32 precedes it).
        rec0 = len(data) - 3 * (4 + 4 * 4)
        off = rec0 + (4 + 4 * 4) + 4
        data[off : off + 4] = struct.pack("<f", float("nan"))
        path.write_bytes(bytes(data))
        with pytest.raises(InvalidFeature, match="record 1"):
            read_dataset(path)

    def test_label_out_of_range(self, tmp_path):
        rng = np.random.default_rng(5)
        ds = small_dataset(rng, n=3, d=4, s=3)
        path = tmp_path / "ds.tdae"
        write_dataset(ds, path)
        data = bytearray(path.read_bytes())
        rec0 = len(data) - 3 * (4 + 4 * 4)
        data[rec0 : rec0 + 4] = struct.pack("<i", 7)
        path.write_bytes(bytes(data))
        with pytest.raises(CorruptDataset, match="record 0"):
            read_dataset(path)

    def test_trailing_garbage(self, tmp_path):
        path = self._write(tmp_path)
        path.write_bytes(path.read_bytes() + b"xx")
        with pytest.raises(CorruptDataset, match="trailing"):
            read_dataset(path)


class TestDatasetInvariants:
    def test_zero_feature_rejected(self):
        with pytest.raises(InvalidFeature):
            EmbeddingDataset(
                class_names=["a", "b"],
                head=np.eye(2),
                features=np.array([[0.0, 0.0]]),
                labels=np.array([0]),
            )

    def test_label_range_checked(self):
        with pytest.raises(CorruptDataset):
            EmbeddingDataset(
                class_names=["a", "b"],
                head=np.eye(2),
                features=np.array([[1.0, 0.0]]),
                labels=np.array([2]),
            )

    def test_permuted_preserves_pairs(self):
        rng = np.random.default_rng(6)
        ds = small_dataset(rng, s=30)
        shuffled = ds.permuted(99)
        assert shuffled.num_samples == ds.num_samples
        orig = {tuple(np.round(f, 5)): l for f, l in zip(ds.features, ds.labels)}
        for f, l in zip(shuffled.features, shuffled.labels):
            assert orig[tuple(np.round(f, 5))] == l
        # Same seed, same order; it is a real permutation of the stream.
        again = ds.permuted(99)
        np.testing.assert_array_equal(again.labels, shuffled.labels)


class TestSyntheticGeneration:
    def test_no_shift_is_perfectly_separable(self):
        ds = generate_synthetic(SynthShiftSpec(dim=16, num_classes=5, samples_per_class=10))
        acc = offline_zero_shot_accuracy(ds.features, ds.head, ds.labels)
        assert acc == 100.0

    def test_deterministic_given_seeds(self):
        spec = SynthShiftSpec(
            dim=32, num_classes=8, samples_per_class=12,
            prototype_seed=5, stream_seed=9, shift_angle=0.3, noise_sigma=0.2,
        )
        a, b = generate_synthetic(spec), generate_synthetic(spec)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.head, b.head)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_different_seeds_differ(self):
        base = SynthShiftSpec(dim=16, num_classes=4, samples_per_class=5, noise_sigma=0.1)
        other = SynthShiftSpec(
            dim=16, num_classes=4, samples_per_class=5, noise_sigma=0.1, stream_seed=77,
        )
        a, b = generate_synthetic(base), generate_synthetic(other)
        assert not np.array_equal(a.features, b.features)

    def test_shift_angle_controls_self_similarity(self):
        spec = SynthShiftSpec(dim=64, num_classes=6, samples_per_class=4, shift_angle=0.4)
        ds = generate_synthetic(spec)
        sims = np.einsum("ij,ij->i", ds.features.astype(np.float64),
                         ds.head[ds.labels].astype(np.float64))
        np.testing.assert_allclose(sims, np.cos(0.4), atol=1e-5)

    def test_shifted_accuracy_between_chance_and_perfect(self):
        spec = SynthShiftSpec(
            dim=64, num_classes=20, samples_per_class=20,
            shift_angle=0.4, noise_sigma=0.3,
        )
        ds = generate_synthetic(spec)
        acc = offline_zero_shot_accuracy(ds.features, ds.head, ds.labels)
        assert 5.0 < acc < 100.0

    def test_zipf_prior_skews_counts(self):
        spec = SynthShiftSpec(
            dim=8, num_classes=6, samples_per_class=50,
            class_prior="zipf", zipf_exponent=1.5,
        )
        ds = generate_synthetic(spec)
        counts = np.bincount(ds.labels, minlength=6)
        assert counts.sum() == 300
        assert counts[0] > counts[-1]

    def test_round_trips_through_format(self, tmp_path):
        spec = SynthShiftSpec(dim=16, num_classes=4, samples_per_class=6, noise_sigma=0.2)
        ds = generate_synthetic(spec)
        path = tmp_path / "synth.tdae"
        write_dataset(ds, path)
        back = read_dataset(path)
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)
