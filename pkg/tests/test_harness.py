import pytest

from dgc.classifier import TrainConfig
from dgc.data import SbmConfig, generate_sbm
from dgc.diffusion import DiffusionConfig
from dgc.errors import ConfigError
from dgc.harness import (
    SweepSpec,
    risk_minimizer,
    run_bench,
    run_noise,
    run_risk,
    run_sweep,
    train_pipeline,
)


@pytest.fixture(scope="module")
def dataset():
    ds, _ = generate_sbm(SbmConfig(blocks=3, nodes_per_block=30, t_star=0.0,
                                   noise_sigma=0.8, seed=21))
    return ds


EULER = DiffusionConfig("euler", t=2.0, k=16)
SGC2 = DiffusionConfig("sgc", k=2)
TCFG = TrainConfig(epochs=20, weight_decay=1e-5)


class TestSweepSpec:
    def test_values_must_increase(self):
        with pytest.raises(ConfigError):
            SweepSpec("T", (1.0, 1.0), EULER)

    def test_values_non_empty(self):
        with pytest.raises(ConfigError):
            SweepSpec("K", (), EULER)

    def test_sgc_t_sweep_rejected(self):
        with pytest.raises(ConfigError):
            SweepSpec("T", (1.0, 2.0), SGC2)

    def test_sgc_k_sweep_couples_t(self):
        spec = SweepSpec("K", (1, 2, 4), SGC2)
        cfg = spec.config_at(4)
        assert cfg.t == 4.0 and cfg.k == 4

    def test_unknown_parameter(self):
        with pytest.raises(ConfigError):
            SweepSpec("alpha", (1.0,), EULER)


class TestRunSweep:
    def test_rows_and_determinism(self, dataset):
        spec = SweepSpec("K", (1, 2, 4), EULER)
        rows1 = run_sweep(dataset, spec, TCFG)
        rows2 = run_sweep(dataset, spec, TCFG)
        assert [r["value"] for r in rows1] == [1, 2, 4]
        for a, b in zip(rows1, rows2):
            assert a["val_acc"] == b["val_acc"]
            assert a["test_acc"] == b["test_acc"]

    def test_t_sweep(self, dataset):
        spec = SweepSpec("T", (0.5, 1.0), EULER)
        rows = run_sweep(dataset, spec, TCFG)
        assert [r["param"] for r in rows] == ["T", "T"]

    def test_sigma_sweep_uses_fixed_config(self, dataset):
        spec = SweepSpec("sigma", (0.0, 0.5), EULER)
        rows = run_sweep(dataset, spec, TCFG, noise_seed=5)
        clean = train_pipeline(dataset, EULER, TCFG)[1]
        assert rows[0]["test_acc"] == clean.final_test_acc

    def test_retune_wd_per_point(self, dataset):
        spec = SweepSpec("K", (1, 4), EULER)
        rows = run_sweep(dataset, spec, TCFG, retune_wd=True)
        assert len(rows) == 2
        assert all(0.0 <= r["val_acc"] <= 1.0 for r in rows)


class TestRunNoise:
    def test_sigma_zero_matches_plain_training(self, dataset):
        rows = run_noise(dataset, [0.0], EULER, SGC2, TCFG, TCFG, n_seeds=3)
        plain = train_pipeline(dataset, EULER, TCFG)[1]
        assert rows[0]["dgc_test_acc"] == plain.final_test_acc
        plain_sgc = train_pipeline(dataset, SGC2, TCFG)[1]
        assert rows[0]["sgc_test_acc"] == plain_sgc.final_test_acc

    def test_row_shape(self, dataset):
        rows = run_noise(dataset, [0.0, 0.3], EULER, SGC2, TCFG, TCFG, n_seeds=2)
        assert len(rows) == 2
        assert rows[1]["sigma"] == 0.3
        assert rows[1]["seeds"] == 2

    def test_accuracy_non_increasing_in_sigma(self, dataset):
        rows = run_noise(dataset, [0.0, 2.0, 8.0], EULER, SGC2, TCFG, TCFG,
                         n_seeds=3)
        accs = [r["dgc_test_acc"] for r in rows]
        assert all(b <= a + 0.01 for a, b in zip(accs, accs[1:]))


class TestRunRisk:
    def test_recovers_interior_minimum(self):
        rows = run_risk(SbmConfig(t_star=2.0, seed=7),
                        [round(0.2 * i, 1) for i in range(21)], k=128)
        tmin = risk_minimizer(rows)
        risk = {r["t_hat"]: r["risk"] for r in rows}
        assert 1.6 <= tmin <= 2.4
        assert risk[tmin] < risk[0.0]
        assert risk[tmin] < risk[4.0]

    def test_no_corruption_prefers_zero(self):
        rows = run_risk(SbmConfig(t_star=0.0, seed=7), [0.0, 0.5, 1.0, 2.0], k=64)
        assert risk_minimizer(rows) <= 0.5

    def test_validation_accuracy_peaks_near_t_star(self):
        # the best validation accuracy over the grid is already attained
        # within 20% of the corruption time
        rows = run_risk(SbmConfig(t_star=2.0, seed=7),
                        [round(0.1 * i, 1) for i in range(41)], k=256)
        best = max(r["val_acc"] for r in rows)
        near = max(r["val_acc"] for r in rows if 1.6 <= r["t_hat"] <= 2.4)
        assert near >= best - 1e-12


class TestRunBench:
    def test_rows_per_config(self, dataset):
        rows = run_bench(dataset, [SGC2, EULER], TCFG, repeats=2)
        assert len(rows) == 2
        assert all(r["preprocess_ms"] > 0 and r["train_ms"] > 0 for r in rows)
        assert rows[0]["scheme"] == "sgc"
        assert rows[1]["total_ms"] == rows[1]["preprocess_ms"] + rows[1]["train_ms"]
