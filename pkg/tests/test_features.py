import hashlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vcdd.features import (
    DEFAULT_SIGMA,
    FeatureMap,
    apply_features,
    apply_z_scaling,
    fit_z_scaling,
    load_feature_map,
    sample_map,
    sample_relu_map,
    sample_rff_map,
    scale_inputs,
)
from vcdd.rng import generator

GOLDEN = {
    "relu": "abd17ef8d5de7787bb80caaf5d229b4230f7508e30a626bebdadcbb5019f7d49",
    "rff": "55c130c65eece5ca857572e6e6219973b120e83c9743cf3260c421ac3bb414eb",
}


class TestSampling:
    def test_relu_range(self):
        m = sample_relu_map(784, 100, seed=7)
        assert m.projections.shape == (100, 784)
        assert m.projections.min() >= -1.0 and m.projections.max() <= 1.0

    def test_relu_deterministic(self):
        a = sample_relu_map(784, 100, seed=7)
        b = sample_relu_map(784, 100, seed=7)
        assert np.array_equal(a.projections, b.projections)
        assert not np.array_equal(a.projections, sample_relu_map(784, 100, seed=8).projections)

    def test_relu_mean(self):
        V = sample_relu_map(2, 100_000, seed=1).projections
        assert np.all(np.abs(V.mean(axis=0)) < 0.01)

    def test_rff_default_sigma(self):
        assert DEFAULT_SIGMA == 0.05
        assert sample_rff_map(3, 4).sigma == 0.05

    def test_rff_std(self):
        V = sample_rff_map(2, 100_000, sigma=0.05, seed=1).projections
        assert np.all(np.abs(V.std(axis=0) / 0.05 - 1.0) < 0.02)

    def test_rff_deterministic(self):
        a, b = sample_rff_map(5, 9, 0.3, 11), sample_rff_map(5, 9, 0.3, 11)
        assert np.array_equal(a.projections, b.projections)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_rff_bad_sigma(self, sigma):
        with pytest.raises(ValueError):
            sample_rff_map(2, 3, sigma)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sample_map("tanh", 2, 3, 0)


class TestInputScaling:
    def test_linear_map(self):
        tr, _, _ = scale_inputs(np.array([[0.0], [5.0], [10.0]]), np.zeros((1, 1)))
        assert tr.ravel().tolist() == [0.0, 0.5, 1.0]

    def test_constant_column(self):
        tr, te, _ = scale_inputs(np.full((3, 1), 3.0), np.array([[7.0]]))
        assert tr.ravel().tolist() == [0.0, 0.0, 0.0]
        assert te.ravel().tolist() == [0.0]

    def test_no_clipping(self):
        _, te, _ = scale_inputs(np.array([[0.0], [10.0]]), np.array([[12.0]]))
        assert te[0, 0] == pytest.approx(1.2)

    def test_empty(self):
        with pytest.raises(ValueError):
            scale_inputs(np.zeros((0, 3)), np.zeros((1, 3)))

    @settings(max_examples=50)
    @given(arrays(np.float64, (6, 3), elements=st.floats(-1e3, 1e3)))
    def test_train_in_unit_interval(self, X):
        tr, _, _ = scale_inputs(X, X)
        assert tr.min() >= 0.0 and tr.max() <= 1.0


class TestApplyFeatures:
    def _map(self, kind, V):
        return FeatureMap(kind, np.atleast_2d(np.asarray(V, dtype=float)), seed=0)

    def test_relu_hand(self):
        m = self._map("relu", [1.0, -1.0])
        assert apply_features(m, [[0.5, 0.2]])[0, 0] == pytest.approx(0.3)

    def test_relu_clamp(self):
        m = self._map("relu", [-1.0, -1.0])
        assert apply_features(m, [[0.5, 0.5]])[0, 0] == 0.0

    def test_rff_origin(self):
        m = self._map("rff", [2.0, 3.0])
        assert apply_features(m, [[0.0, 0.0]]).tolist() == [[1.0, 0.0]]

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply_features(sample_relu_map(3, 2, 0), np.zeros((4, 2)))

    def test_rff_unit_modulus(self):
        m = sample_rff_map(10, 50, sigma=1.0, seed=3)
        Z = apply_features(m, generator(1).uniform(0, 1, (30, 10)))
        assert Z.shape == (30, 100)
        np.testing.assert_allclose(Z[:, 0::2] ** 2 + Z[:, 1::2] ** 2, 1.0, atol=1e-12)

    def test_relu_non_negative(self):
        m = sample_relu_map(10, 50, seed=3)
        assert apply_features(m, generator(1).uniform(0, 1, (30, 10))).min() >= 0.0


class TestZScaling:
    def _map(self):
        return FeatureMap("relu", np.ones((1, 1)), seed=0)

    def test_examples(self):
        m = fit_z_scaling(self._map(), np.array([[0.0], [2.0], [4.0]]))
        assert apply_z_scaling(m, np.array([[0.0], [2.0], [4.0]])).ravel().tolist() == [-1.0, 0.0, 1.0]
        assert apply_z_scaling(m, np.array([[5.0]]))[0, 0] == pytest.approx(1.5)

    def test_constant(self):
        m = fit_z_scaling(self._map(), np.full((4, 1), 2.5))
        assert np.all(apply_z_scaling(m, np.full((4, 1), 2.5)) == 0.0)

    def test_unfitted(self):
        with pytest.raises(RuntimeError):
            apply_z_scaling(self._map(), np.zeros((1, 1)))

    def test_wrong_width(self):
        with pytest.raises(ValueError):
            fit_z_scaling(sample_rff_map(2, 3), np.zeros((4, 3)))

    def test_train_range(self):
        m = sample_relu_map(20, 64, seed=2)
        X = generator(9).uniform(0, 1, (50, 20))
        Z = apply_features(m, X)
        S = apply_z_scaling(fit_z_scaling(m, Z), Z)
        assert S.min() >= -1.0 and S.max() <= 1.0

    def test_sphere_mode(self):
        m = sample_relu_map(20, 64, seed=2)
        Z = apply_features(m, generator(9).uniform(0, 1, (50, 20)))
        S = apply_z_scaling(fit_z_scaling(m, Z, sphere=True), Z)
        assert np.linalg.norm(S, axis=1).max() == pytest.approx(1.0)


def _pipeline(kind):
    g = generator(2024)
    Xtr, Xte = g.uniform(0, 255, (40, 12)), g.uniform(0, 255, (10, 12))
    a, b, _ = scale_inputs(Xtr, Xte)
    m = sample_map(kind, 12, 16, seed=5)
    Z = apply_features(m, a)
    m = fit_z_scaling(m, Z)
    return m, np.concatenate([apply_z_scaling(m, Z), apply_z_scaling(m, apply_features(m, b))])


@pytest.mark.parametrize("kind", ["relu", "rff"])
def test_pipeline_golden_hash(kind):
    _, out = _pipeline(kind)
    assert hashlib.sha256(np.round(out, 10).tobytes()).hexdigest() == GOLDEN[kind]


@pytest.mark.parametrize("kind", ["relu", "rff"])
def test_sidecar_round_trip(tmp_path, kind):
    from vcdd.features import save_feature_map

    m, _ = _pipeline(kind)
    save_feature_map(m, tmp_path / "map.npz")
    back = load_feature_map(tmp_path / "map.npz")
    assert back.kind == m.kind and back.seed == m.seed and back.sigma == m.sigma
    assert np.array_equal(back.projections, m.projections)
    assert np.array_equal(back.z_lo, m.z_lo) and np.array_equal(back.z_hi, m.z_hi)
    assert back.radius is None
