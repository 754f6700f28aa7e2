import json
import shutil

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgc.data import (
    LabeledDataset,
    SbmConfig,
    add_feature_noise,
    generate_sbm,
    load_bundle,
    row_normalize,
    write_bundle,
)
from dgc.errors import (
    MaskOverlapError,
    MissingFileError,
    OracleLimitError,
    SchemaViolationError,
)
from dgc.graphcore import laplacian, normalize
from dgc.oracle import eigendecompose, exact_heat_kernel

from conftest import FIXTURES

TRI = FIXTURES / "tri"


def _copy_tri(tmp_path):
    dst = tmp_path / "tri"
    shutil.copytree(TRI, dst)
    return dst


def _rewrite(path, name, lines):
    with open(path / name, "w", newline="\n") as f:
        f.write("".join(line + "\n" for line in lines))


class TestLoadBundle:
    def test_fixture_round_trip_fields(self):
        ds = load_bundle(TRI)
        assert ds.n == 3
        assert ds.num_classes == 2
        assert ds.graph.nnz == 4
        assert ds.labels.tolist() == [0, 1, 1]
        assert ds.train_mask.tolist() == [True, False, False]
        np.testing.assert_array_equal(ds.features[1], [0.5, 0.5])
        assert ds.graph.vals.max() == 2.5

    def test_write_is_byte_identical(self, tmp_path):
        ds = load_bundle(TRI)
        out = tmp_path / "tri2"
        write_bundle(ds, out)
        for name in ("meta.json", "edges.tsv", "features.tsv",
                     "labels.tsv", "splits.tsv"):
            assert (out / name).read_bytes() == (TRI / name).read_bytes(), name

    def test_bin_features_round_trip(self, tmp_path):
        ds = load_bundle(TRI)
        binds = LabeledDataset(
            graph=ds.graph, features=ds.features, labels=ds.labels,
            train_mask=ds.train_mask, val_mask=ds.val_mask, test_mask=ds.test_mask,
            num_classes=ds.num_classes, features_format="bin",
        )
        out = tmp_path / "tri_bin"
        write_bundle(binds, out)
        loaded = load_bundle(out)
        np.testing.assert_array_equal(loaded.features, ds.features)
        out2 = tmp_path / "tri_bin2"
        write_bundle(loaded, out2)
        assert (out2 / "features.bin").read_bytes() == (out / "features.bin").read_bytes()

    def test_row_normalize_flag(self, tmp_path):
        path = _copy_tri(tmp_path)
        meta = json.loads((path / "meta.json").read_text())
        meta["row_normalize"] = True
        (path / "meta.json").write_text(json.dumps(meta))
        _rewrite(path, "features.tsv", ["2.0\t2.0", "1.0\t3.0", "0.0\t0.0"])
        ds = load_bundle(path)
        np.testing.assert_array_equal(ds.features[0], [0.5, 0.5])
        np.testing.assert_array_equal(ds.features[1], [0.25, 0.75])
        np.testing.assert_array_equal(ds.features[2], [0.0, 0.0])

    def test_missing_file(self, tmp_path):
        path = _copy_tri(tmp_path)
        (path / "labels.tsv").unlink()
        with pytest.raises(MissingFileError):
            load_bundle(path)

    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingFileError):
            load_bundle(tmp_path / "nope")

    def test_mask_overlap(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "splits.tsv", ["0\ttrain", "0\ttest", "1\tval", "2\ttest"])
        with pytest.raises(MaskOverlapError):
            load_bundle(path)

    def test_label_out_of_range(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "labels.tsv", ["0\t0", "1\t5", "2\t1"])
        with pytest.raises(SchemaViolationError):
            load_bundle(path)

    def test_unlabeled_node(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "labels.tsv", ["0\t0", "1\t1"])
        with pytest.raises(SchemaViolationError):
            load_bundle(path)

    def test_edge_out_of_range(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "edges.tsv", ["0\t9"])
        with pytest.raises(SchemaViolationError):
            load_bundle(path)

    def test_bad_split_name(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "splits.tsv", ["0\tdev"])
        with pytest.raises(SchemaViolationError):
            load_bundle(path)

    def test_wrong_feature_count(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "features.tsv", ["1.0\t0.0", "0.5\t0.5"])
        with pytest.raises(SchemaViolationError):
            load_bundle(path)

    def test_nodes_may_be_unsplit(self, tmp_path):
        path = _copy_tri(tmp_path)
        _rewrite(path, "splits.tsv", ["0\ttrain", "2\ttest"])
        ds = load_bundle(path)
        assert not ds.val_mask.any()

    def test_cora_bundle_stats(self):
        from conftest import require_bundle

        ds = require_bundle("cora")
        assert ds.n == 2708
        assert ds.num_classes == 7
        # the historically quoted citation count (5429) includes duplicate
        # pairs; the deduplicated undirected edge set is slightly smaller
        assert 5000 <= ds.graph.nnz // 2 <= 5429
        assert ds.train_mask.sum() == 140
        assert ds.val_mask.sum() == 500
        assert ds.test_mask.sum() == 1000


class TestRowNormalize:
    def test_simple(self):
        np.testing.assert_array_equal(row_normalize(np.array([[2.0, 2.0]])), [[0.5, 0.5]])

    def test_zero_row(self):
        np.testing.assert_array_equal(row_normalize(np.zeros((1, 3))), np.zeros((1, 3)))

    def test_idempotent_on_dyadic_rows(self):
        x = np.array([[2.0, 2.0], [0.0, 0.0], [1.0, 3.0]])
        once = row_normalize(x)
        np.testing.assert_array_equal(row_normalize(once), once)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_idempotent_within_roundoff(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((int(rng.integers(1, 12)), int(rng.integers(1, 8))))
        once = row_normalize(x)
        np.testing.assert_allclose(row_normalize(once), once, rtol=0, atol=1e-15)


class TestNoise:
    def test_sigma_zero_is_copy(self):
        x = np.ones((4, 4))
        out = add_feature_noise(x, 0.0, 1)
        np.testing.assert_array_equal(out, x)
        assert out is not x

    def test_seeded_determinism(self):
        x = np.zeros((10, 10))
        np.testing.assert_array_equal(
            add_feature_noise(x, 0.5, 3), add_feature_noise(x, 0.5, 3)
        )

    def test_generator_moments(self):
        x = np.zeros((1000, 1000))
        sigma = 0.7
        noise = add_feature_noise(x, sigma, 9)
        assert abs(noise.mean()) <= 3.0 * sigma / 1000.0
        assert abs(noise.std() - sigma) <= 0.01 * sigma

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            add_feature_noise(np.ones((1, 1)), -0.1, 0)


class TestSbm:
    def test_determinism(self):
        cfg = SbmConfig(blocks=3, nodes_per_block=60, p_in=0.2, p_out=0.02,
                        t_star=2.0, seed=7)
        ds1, clean1 = generate_sbm(cfg)
        ds2, clean2 = generate_sbm(cfg)
        np.testing.assert_array_equal(ds1.graph.cols, ds2.graph.cols)
        np.testing.assert_array_equal(ds1.features, ds2.features)
        np.testing.assert_array_equal(clean1, clean2)
        np.testing.assert_array_equal(ds1.train_mask, ds2.train_mask)

    def test_t_star_zero_observed_equals_clean(self):
        ds, clean = generate_sbm(SbmConfig(t_star=0.0, seed=1))
        np.testing.assert_array_equal(ds.features, clean)

    def test_corruption_is_invertible(self):
        cfg = SbmConfig(blocks=3, nodes_per_block=30, t_star=2.0, seed=2)
        ds, clean = generate_sbm(cfg)
        eig = eigendecompose(laplacian(normalize(ds.graph, "aug")).to_dense())
        recovered = exact_heat_kernel(eig, cfg.t_star, ds.features)
        assert np.abs(recovered - clean).max() <= 1e-6

    def test_split_proportions(self):
        ds, _ = generate_sbm(SbmConfig(blocks=2, nodes_per_block=50, t_star=0.0, seed=3))
        assert ds.train_mask.sum() == 60
        assert ds.val_mask.sum() == 20
        assert ds.test_mask.sum() == 20
        assert not (ds.train_mask & ds.val_mask).any()
        assert (ds.train_mask | ds.val_mask | ds.test_mask).all()

    def test_labels_are_blocks(self):
        ds, _ = generate_sbm(SbmConfig(blocks=4, nodes_per_block=10, t_star=0.0, seed=4))
        assert ds.num_classes == 4
        assert ds.labels.tolist() == sorted(ds.labels.tolist())

    def test_oracle_limit(self):
        with pytest.raises(OracleLimitError):
            generate_sbm(SbmConfig(blocks=3, nodes_per_block=700, t_star=1.0))

    def test_big_graph_fine_without_corruption(self):
        ds, _ = generate_sbm(SbmConfig(blocks=3, nodes_per_block=700, t_star=0.0,
                                       p_in=0.01, p_out=0.001))
        assert ds.n == 2100

    def test_invalid_probabilities(self):
        with pytest.raises(ValueError):
            SbmConfig(p_in=0.1, p_out=0.5)
