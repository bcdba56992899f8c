import gzip
import math
import struct

import numpy as np
import pytest

from vcdd.data import (
    CIFAR10_CLASSES,
    BinaryDataset,
    DataFormatError,
    RawImages,
    cifar10_class,
    corrupt_labels,
    corrupt_pixels,
    load_cifar10,
    load_dataset,
    load_mnist,
    make_binary_task,
    save_dataset,
    synth_gaussians,
    write_cifar10,
    write_idx_images,
    write_idx_labels,
)
from vcdd.features import scale_inputs
from vcdd.rng import generator
from vcdd.solvers import fit_min_norm_ls, zero_one_error


@pytest.fixture
def idx_pair(tmp_path):
    g = generator(1)
    images = g.integers(0, 256, size=(7, 28, 28)).astype(np.uint8)
    labels = g.integers(0, 10, size=7).astype(np.uint8)
    write_idx_images(tmp_path / "img", images)
    write_idx_labels(tmp_path / "lab", labels)
    return tmp_path / "img", tmp_path / "lab", images, labels


class TestMnist:
    def test_round_trip(self, idx_pair):
        img, lab, images, labels = idx_pair
        raw = load_mnist(img, lab)
        assert np.array_equal(raw.images, images.reshape(7, 784))
        assert np.array_equal(raw.labels, labels)
        assert raw.images.max() <= 255

    def test_magic_bytes(self, idx_pair):
        img, lab, *_ = idx_pair
        assert img.read_bytes()[:4] == b"\x00\x00\x08\x03"
        assert lab.read_bytes()[:4] == b"\x00\x00\x08\x01"

    def test_gzip(self, idx_pair, tmp_path):
        img, lab, images, _ = idx_pair
        gz = tmp_path / "img.gz"
        gz.write_bytes(gzip.compress(img.read_bytes()))
        assert np.array_equal(load_mnist(gz, lab).images, images.reshape(7, 784))

    def test_swapped_files(self, idx_pair):
        img, lab, *_ = idx_pair
        with pytest.raises(DataFormatError, match="magic"):
            load_mnist(lab, img)

    def test_truncated_offset(self, idx_pair):
        img, lab, *_ = idx_pair
        raw = img.read_bytes()
        img.write_bytes(raw[:-10])
        expected = 16 + 7 * 784 - 10
        with pytest.raises(DataFormatError, match=f"offset {expected}"):
            load_mnist(img, lab)

    def test_count_mismatch(self, idx_pair):
        img, lab, *_ = idx_pair
        write_idx_labels(lab, np.zeros(6, dtype=np.uint8))
        with pytest.raises(DataFormatError, match="7 images"):
            load_mnist(img, lab)


class TestCifar:
    def test_ten_records(self, tmp_path):
        g = generator(2)
        images = g.integers(0, 256, size=(10, 3072)).astype(np.uint8)
        labels = np.arange(10, dtype=np.uint8)
        write_cifar10(tmp_path / "b", images, labels)
        assert (tmp_path / "b").stat().st_size == 30730
        raw = load_cifar10([tmp_path / "b"])
        assert raw.images.shape == (10, 3072)
        assert np.array_equal(raw.images, images) and np.array_equal(raw.labels, labels)

    def test_class_table(self):
        assert CIFAR10_CLASSES[1] == "automobile" and CIFAR10_CLASSES[3] == "cat"
        assert cifar10_class("cat") == 3 and cifar10_class("1") == 1

    def test_empty(self, tmp_path):
        (tmp_path / "e").write_bytes(b"")
        with pytest.raises(DataFormatError, match="empty"):
            load_cifar10(tmp_path / "e")

    def test_bad_length(self, tmp_path):
        (tmp_path / "x").write_bytes(b"\x00" * 3074)
        with pytest.raises(DataFormatError, match="multiple"):
            load_cifar10(tmp_path / "x")


def _raw(per_class=30, classes=(5, 8, 3)):
    g = generator(3)
    labels = np.repeat(np.array(classes, dtype=np.uint8), per_class)
    return RawImages(g.integers(0, 256, size=(labels.size, 16)).astype(np.uint8), labels, "toy")


class TestBinaryTask:
    def test_balanced_split(self):
        ds = make_binary_task(_raw(), 5, 8, 20, 30, seed=0)
        assert ds.n_train == 20 and ds.n_test == 30
        assert (ds.y_train == 1).sum() == 10 and (ds.y_test == -1).sum() == 15
        assert ds.X_train.max() <= 1.0

    def test_no_overlap(self):
        ds = make_binary_task(_raw(), 5, 8, 30, 30, seed=4)
        assert not set(ds.provenance["train_index"]) & set(ds.provenance["test_index"])

    def test_deterministic(self):
        a = make_binary_task(_raw(), 5, 8, 20, 20, seed=9)
        b = make_binary_task(_raw(), 5, 8, 20, 20, seed=9)
        assert a.provenance["train_index"] == b.provenance["train_index"]
        assert np.array_equal(a.X_train, b.X_train)

    def test_insufficient(self):
        with pytest.raises(ValueError, match="has 30 samples"):
            make_binary_task(_raw(), 5, 8, 40, 30, seed=0)

    def test_mnist_fixture_sizes(self, mnist58):
        ds = make_binary_task(mnist58, 5, 8, 800, 200, seed=0)
        assert (ds.y_train == 1).sum() == 400 and (ds.y_train == -1).sum() == 400
        ds = make_binary_task(mnist58, 5, 8, 200, 800, seed=0)
        assert (ds.y_train == 1).sum() == 100


class TestLabelNoise:
    def _ds(self):
        return synth_gaussians(3, 800, 50, 1.0, seed=1)

    def test_zero(self):
        ds = self._ds()
        assert corrupt_labels(ds, 0.0, 1) is ds

    def test_exact_count(self):
        ds = self._ds()
        noisy = corrupt_labels(ds, 0.05, 1)
        assert (noisy.y_train != ds.y_train).sum() == 40
        assert np.array_equal(noisy.y_test, ds.y_test)
        assert np.array_equal(noisy.X_train, ds.X_train)
        assert noisy.provenance["noise"][-1].startswith("labels:0.05")

    def test_involution(self):
        ds = self._ds()
        twice = corrupt_labels(corrupt_labels(ds, 0.1, 5), 0.1, 5)
        assert np.array_equal(twice.y_train, ds.y_train)

    @pytest.mark.parametrize("f", [-0.1, 0.6])
    def test_range(self, f):
        with pytest.raises(ValueError):
            corrupt_labels(self._ds(), f, 0)


class TestPixelNoise:
    def _ds(self, n=1000):
        g = generator(6)
        X = g.uniform(0.3, 0.7, (n, 1000))
        y = np.where(np.arange(n) % 2, 1.0, -1.0)
        return BinaryDataset(X, y, X[:10].copy(), y[:10].copy(), {"noise": []})

    def test_zero(self):
        ds = self._ds(10)
        assert corrupt_pixels(ds, 0.0, 1) is ds

    def test_std_and_clip(self):
        ds = self._ds()
        noisy = corrupt_pixels(ds, 0.1, seed=2)
        # inputs sit in [0.3, 0.7] so clipping at 3 sigma barely bites
        assert np.std(noisy.X_train - ds.X_train) == pytest.approx(0.1, rel=0.01)
        assert noisy.X_train.min() >= 0.0 and noisy.X_train.max() <= 1.0
        assert not np.array_equal(noisy.X_test, ds.X_test)

    def test_train_only(self):
        ds = self._ds(10)
        noisy = corrupt_pixels(ds, 0.2, seed=2, train_only=True)
        assert np.array_equal(noisy.X_test, ds.X_test)

    def test_requires_unit_range(self):
        ds = synth_gaussians(2, 10, 10, 1.0, 0)
        with pytest.raises(ValueError):
            corrupt_pixels(ds, 0.1, 0)


class TestSynth:
    def test_deterministic(self):
        a, b = synth_gaussians(4, 50, 50, 2.0, 3), synth_gaussians(4, 50, 50, 2.0, 3)
        assert np.array_equal(a.X_train, b.X_train) and np.array_equal(a.y_test, b.y_test)

    def test_no_separation_is_chance(self):
        ds = synth_gaussians(5, 200, 5000, 0.0, 1)
        m = fit_min_norm_ls(ds.X_train, ds.y_train)
        assert zero_one_error(m, ds.X_test, ds.y_test) == pytest.approx(0.5, abs=0.03)

    def test_bayes_error(self):
        ds = synth_gaussians(10, 4000, 20000, 4.0, 2)
        bayes = 0.5 * math.erfc(2.0 / math.sqrt(2.0))
        assert bayes == pytest.approx(0.02275, abs=1e-5)
        Xtr, Xte, _ = scale_inputs(ds.X_train, ds.X_test)
        m = fit_min_norm_ls(Xtr, ds.y_train)
        err = zero_one_error(m, Xte, ds.y_test)
        assert bayes - 0.01 <= err <= bayes + 0.02


class TestCache:
    def test_round_trip(self, tmp_path):
        ds = corrupt_labels(synth_gaussians(6, 20, 12, 1.5, 8), 0.1, 3)
        save_dataset(ds, tmp_path / "c.bin")
        raw = (tmp_path / "c.bin").read_bytes()
        assert raw[:8] == b"VCDDDATA"
        assert struct.unpack_from("<I", raw, 8)[0] == 1
        back = load_dataset(tmp_path / "c.bin")
        assert np.array_equal(back.X_train, ds.X_train.astype(np.float32))
        assert np.array_equal(back.y_train, ds.y_train)
        assert back.provenance == ds.provenance

    def test_truncated(self, tmp_path):
        save_dataset(synth_gaussians(2, 4, 4, 1.0, 0), tmp_path / "c.bin")
        p = tmp_path / "c.bin"
        p.write_bytes(p.read_bytes()[:-3])
        with pytest.raises(DataFormatError, match="truncated"):
            load_dataset(p)
