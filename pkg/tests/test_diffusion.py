import numpy as np
import pytest

from dgc.diffusion import (
    DiffusionConfig,
    euler_propagate,
    propagate,
    read_feature_cache,
    rk4_propagate,
    sgc_propagate,
    write_feature_cache,
)
from dgc.errors import (
    CacheFormatError,
    ConfigError,
    DimensionMismatchError,
    NonFiniteError,
    UnstableStepSizeError,
)
from dgc.graphcore import laplacian, normalize
from dgc.oracle import eigendecompose, exact_heat_kernel

from conftest import er_graph


@pytest.fixture
def s2(two_node):
    return normalize(two_node, "aug")


class TestConfig:
    def test_sgc_derives_t_from_k(self):
        cfg = DiffusionConfig("sgc", k=2)
        assert cfg.t == 2.0

    def test_sgc_rejects_decoupled_t(self):
        with pytest.raises(ConfigError):
            DiffusionConfig("sgc", t=3.0, k=2)

    def test_k_zero_with_positive_t(self):
        with pytest.raises(ConfigError):
            DiffusionConfig("euler", t=1.0, k=0)

    def test_sym_step_size_limit(self):
        with pytest.raises(UnstableStepSizeError):
            DiffusionConfig("euler", "sym", t=4.0, k=2)
        DiffusionConfig("euler", "sym", t=2.0, k=2)  # dt = 1 is allowed

    def test_negative_t(self):
        with pytest.raises(ConfigError):
            DiffusionConfig("euler", t=-1.0, k=4)

    def test_unknown_scheme(self):
        with pytest.raises(ConfigError):
            DiffusionConfig("leapfrog", t=1.0, k=1)


class TestSgc:
    def test_zero_steps_is_copy(self, s2):
        x = np.array([[1.0], [0.0]])
        out = sgc_propagate(x, s2, 0)
        np.testing.assert_array_equal(out, x)
        assert out is not x

    def test_one_step(self, s2):
        out = sgc_propagate(np.array([[1.0], [0.0]]), s2, 1)
        np.testing.assert_array_equal(out, [[0.5], [0.5]])

    def test_equilibrium_after_one_step(self, s2):
        # this S is the rank-1 averaging operator: already converged at k=1
        out = sgc_propagate(np.array([[1.0], [0.0]]), s2, 64)
        np.testing.assert_allclose(out, [[0.5], [0.5]], atol=1e-15)

    def test_dimension_mismatch(self, s2):
        with pytest.raises(DimensionMismatchError):
            sgc_propagate(np.ones((3, 1)), s2, 1)

    def test_inputs_not_mutated(self, s2):
        x = np.array([[1.0], [0.0]])
        snapshot = x.copy()
        for out in (
            sgc_propagate(x, s2, 3),
            euler_propagate(x, s2, 2.0, 8),
            rk4_propagate(x, s2, 2.0, 8),
        ):
            assert out is not x
        np.testing.assert_array_equal(x, snapshot)

    def test_nan_rejected(self, s2):
        with pytest.raises(NonFiniteError):
            sgc_propagate(np.array([[np.nan], [0.0]]), s2, 1)


class TestEuler:
    def test_zero_time_is_copy(self, s2):
        x = np.array([[0.3], [0.7]])
        out = euler_propagate(x, s2, 0.0, 5)
        np.testing.assert_array_equal(out, x)

    def test_matches_exact_kernel_at_ln2(self, s2):
        # exact kernel is 0.5*[[1+e^-t, 1-e^-t], [1-e^-t, 1+e^-t]]
        out = euler_propagate(np.array([[1.0], [0.0]]), s2, np.log(2.0), 1024)
        np.testing.assert_allclose(out, [[0.75], [0.25]], atol=1e-3)

    def test_unit_step_equals_sgc(self):
        rng = np.random.default_rng(11)
        g = er_graph(rng, 17)
        s = normalize(g, "aug")
        x = rng.standard_normal((17, 3))
        for k in (1, 2, 7):
            np.testing.assert_array_equal(
                euler_propagate(x, s, float(k), k), sgc_propagate(x, s, k)
            )

    def test_sym_unstable_step_rejected(self, two_node):
        s = normalize(two_node, "sym")
        with pytest.raises(UnstableStepSizeError):
            euler_propagate(np.ones((2, 1)), s, 4.0, 2)

    def test_non_expansion_in_frobenius(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            n = int(rng.integers(2, 40))
            g = er_graph(rng, n)
            s = normalize(g, "aug")
            x = rng.standard_normal((n, 4))
            for t, k in ((1.0, 2), (3.0, 4), (8.0, 8)):
                out = euler_propagate(x, s, t, k)
                assert np.linalg.norm(out) <= np.linalg.norm(x) * (1 + 1e-12)

    def test_equilibrium_vector_preserved(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            n = int(rng.integers(2, 40))
            g = er_graph(rng, n)
            s = normalize(g, "aug")
            v = np.sqrt(g.degrees() + 1.0).reshape(n, 1)
            for t, k in ((1.0, 1), (5.3, 100), (10.0, 3)):
                out = euler_propagate(v, s, t, k)
                assert np.linalg.norm(out - v) <= 1e-12 * np.linalg.norm(v)


class TestRk4:
    def test_zero_time_is_copy(self, s2):
        x = np.array([[1.0], [2.0]])
        np.testing.assert_array_equal(rk4_propagate(x, s2, 0.0, 3), x)

    def test_close_to_exact_kernel(self, s2):
        out = rk4_propagate(np.array([[1.0], [0.0]]), s2, 1.0, 4)
        exact = np.array([[(1 + np.exp(-1)) / 2], [(1 - np.exp(-1)) / 2]])
        np.testing.assert_allclose(out, exact, atol=1e-5)

    def test_fourth_order_error_ratio(self):
        rng = np.random.default_rng(14)
        g = er_graph(rng, 12)
        s = normalize(g, "aug")
        eig = eigendecompose(laplacian(s).to_dense())
        x = rng.standard_normal((12, 2))
        x /= np.linalg.norm(x)
        exact = exact_heat_kernel(eig, 2.0, x)
        errs = {
            k: np.linalg.norm(rk4_propagate(x, s, 2.0, k) - exact)
            for k in (4, 8, 16)
        }
        for k in (4, 8):
            if errs[2 * k] > 1e-12:
                assert 10.0 < errs[k] / errs[2 * k] < 25.0

    def test_euler_first_order_error_ratio(self):
        rng = np.random.default_rng(15)
        g = er_graph(rng, 12)
        s = normalize(g, "aug")
        eig = eigendecompose(laplacian(s).to_dense())
        x = rng.standard_normal((12, 2))
        x /= np.linalg.norm(x)
        exact = exact_heat_kernel(eig, 2.0, x)
        errs = {
            k: np.linalg.norm(euler_propagate(x, s, 2.0, k) - exact)
            for k in (16, 32, 64)
        }
        for k in (16, 32):
            assert 2 ** 0.8 < errs[k] / errs[2 * k] < 2 ** 1.2


class TestDispatch:
    def test_sgc_dispatch(self, s2):
        x = np.array([[1.0], [0.0]])
        cfg = DiffusionConfig("sgc", k=2)
        np.testing.assert_array_equal(propagate(x, s2, cfg), sgc_propagate(x, s2, 2))

    def test_euler_unit_dispatch(self, s2):
        x = np.array([[1.0], [0.0]])
        cfg = DiffusionConfig("euler", t=1.0, k=1)
        np.testing.assert_array_equal(propagate(x, s2, cfg), sgc_propagate(x, s2, 1))

    def test_variant_mismatch(self, two_node):
        s = normalize(two_node, "sym")
        with pytest.raises(ConfigError):
            propagate(np.ones((2, 1)), s, DiffusionConfig("euler", "aug", t=1.0, k=1))

    def test_rk4_dispatch(self, s2):
        x = np.array([[1.0], [0.0]])
        cfg = DiffusionConfig("rk4", t=1.0, k=4)
        np.testing.assert_array_equal(
            propagate(x, s2, cfg), rk4_propagate(x, s2, 1.0, 4)
        )


class TestCache:
    def test_round_trip(self, tmp_path, s2):
        x = np.random.default_rng(0).standard_normal((2, 5))
        cfg = DiffusionConfig("euler", t=2.5, k=40)
        out = propagate(x, s2, cfg)
        path = tmp_path / "feat.dgcf"
        write_feature_cache(path, out, cfg)
        loaded, loaded_cfg = read_feature_cache(path)
        np.testing.assert_array_equal(loaded, out)
        assert loaded_cfg == cfg

    def test_magic_bytes(self, tmp_path):
        path = tmp_path / "feat.dgcf"
        write_feature_cache(path, np.ones((2, 2)), DiffusionConfig("sgc", k=1))
        assert path.read_bytes()[:4] == b"DGCF"

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.dgcf"
        path.write_bytes(b"NOPE" + b"\x00" * 60)
        with pytest.raises(CacheFormatError):
            read_feature_cache(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "feat.dgcf"
        write_feature_cache(path, np.ones((4, 4)), DiffusionConfig("sgc", k=1))
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 8])
        with pytest.raises(CacheFormatError):
            read_feature_cache(path)
