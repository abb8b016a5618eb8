import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdisc import bench
from qdisc.bench import ConfigError, ExperimentConfig, NoiseConfig, TrialResult
from qdisc.discriminator import DiscriminatorModel
from qdisc.qcore import Circuit, GateOp
from qdisc.synth import circuit_predict, synthesize


def iris(n, trials=20, seed=1, **kw):
    return ExperimentConfig("iris", n, trials, seed, **kw)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ConfigError):
            ExperimentConfig("mnist", 10)
        with pytest.raises(ConfigError):
            ExperimentConfig("iris", 0)
        with pytest.raises(ConfigError):
            ExperimentConfig("iris", 10, trials=0)

    def test_noise_parse(self):
        assert NoiseConfig.parse("readout=0.1,shots=3") == NoiseConfig(0.1, 0.015, 3)
        assert NoiseConfig.parse("") == NoiseConfig()
        for bad in ("readout=2", "foo=1", "shots=0", "gate=x", "readout"):
            with pytest.raises(ConfigError):
                NoiseConfig.parse(bad)


class TestPartition:
    @given(st.integers(2, 200).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))), st.integers(0, 2**32))
    def test_disjoint_cover(self, sizes, seed):
        size, n = sizes
        tr, va = bench.partition(size, n, np.random.default_rng(seed))
        assert len(tr) == n and len(va) == size - n
        assert sorted(np.concatenate([tr, va]).tolist()) == list(range(size))


class TestTrial:
    def test_deterministic(self):
        cfg = iris(8)
        seed = bench.trial_seed(cfg.master_seed, 3)
        assert bench.run_trial(cfg, seed, 3) == bench.run_trial(cfg, bench.trial_seed(1, 3), 3)

    def test_full_size_rejected(self):
        with pytest.raises(ConfigError):
            bench.run_trial(iris(100), 0)
        with pytest.raises(ConfigError):
            bench.run_experiment(iris(100))

    def test_counts(self):
        r = bench.run_trial(iris(30), 5)
        assert r.size == 70 == len(r.predictions)
        assert r.accuracy == 1 - np.mean(np.array(r.predictions) != self._val_labels(iris(30), 5))

    @staticmethod
    def _val_labels(cfg, seed):
        data = bench.load_feature_set(cfg)
        _, va = bench.partition(len(data), cfg.train_size, np.random.default_rng(seed))
        return data.labels[va]

    @pytest.mark.parametrize("seed", range(10))
    def test_n99_seen_pattern_is_correct(self, seed):
        cfg = iris(99)
        data = bench.load_feature_set(cfg)
        tr, va = bench.partition(100, 99, np.random.default_rng(seed))
        seen = {tuple(x) for x in data.features[tr].tolist()}
        r = bench.run_trial(cfg, seed)
        if tuple(data.features[va[0]].tolist()) in seen:
            assert r.accuracy == 1.0

    @pytest.mark.parametrize("cfg", [iris(4), iris(8), ExperimentConfig("bas", 11, 1, 4), ExperimentConfig("bas", 40, 1, 9)])
    @pytest.mark.parametrize("seed", range(15))
    def test_zero_fp_and_seen_bound(self, cfg, seed):
        data = bench.load_feature_set(cfg)
        tr, va = bench.partition(len(data), cfg.train_size, np.random.default_rng(seed))
        seen = {tuple(x) for x in data.features[tr].tolist()}
        seen_frac = np.mean([tuple(x) in seen for x in data.features[va].tolist()])
        r = bench.run_trial(cfg, seed)
        assert r.fp == 0
        assert r.accuracy >= seen_frac


class TestMetrics:
    def test_conventions(self):
        r = TrialResult(0, (0, 0), tp=0, fp=0, tn=1, fn=1)
        assert r.precision == 1.0 and r.recall == 0.0 and r.fnr == 1.0 and r.fpr == 0.0
        r = TrialResult(0, (0,), tp=0, fp=0, tn=1, fn=0)
        assert r.recall == 1.0 and r.fnr == 0.0

    def test_confusion(self):
        assert bench.confusion([1, 1, 0, 0], [1, 0, 0, 1]) == (1, 1, 1, 1)

    def test_histogram_edges(self):
        hist = bench.accuracy_histogram([1.0, 0.975, 0.974, 0.0])
        assert len(hist) == 40 and hist[0][:2] == (0.0, 2.5) and hist[-1][:2] == (97.5, 100.0)
        assert hist[-1][2] == 2 and hist[-2][2] == 1 and hist[0][2] == 1

    def test_summary(self):
        _, results = bench.run_experiment(iris(8, trials=50))
        stats = bench.summarize(results)
        acc = np.array([r.accuracy for r in results])
        assert stats.accuracy.std == pytest.approx(np.sqrt(np.mean((acc - acc.mean()) ** 2)), abs=1e-15)
        for m in (stats.accuracy, stats.precision, stats.recall, stats.fnr, stats.fpr):
            assert m.min <= m.median <= m.max
        assert sum(c for _, _, c in stats.histogram) == 50

    def test_empty(self):
        with pytest.raises(ValueError):
            bench.summarize([])


class TestExperiment:
    def test_thread_independent(self):
        cfg = iris(8, trials=40, noise=NoiseConfig(shots=5))
        a = bench.run_experiment(cfg, threads=1)
        b = bench.run_experiment(cfg, threads=4)
        assert a == b
        assert [r.trial_index for r in a[1]] == list(range(40))

    def test_trial_seed_derivation(self):
        cfg = iris(8, trials=5, seed=42)
        _, results = bench.run_experiment(cfg, threads=1)
        assert results[2] == bench.run_trial(cfg, np.random.SeedSequence([42, 2]), 2)

    def test_bas_dataset_fixed_per_seed(self):
        a = bench.load_feature_set(ExperimentConfig("bas", 11, 1, 3))
        b = bench.load_feature_set(ExperimentConfig("bas", 80, 1, 3))
        assert a is b and len(a) == 100

    def test_noisy_not_better(self):
        clean, _ = bench.run_experiment(iris(80, trials=100, seed=5))
        noisy, _ = bench.run_experiment(iris(80, trials=100, seed=5, noise=NoiseConfig(shots=64)))
        assert noisy.accuracy.mean <= clean.accuracy.mean + 0.01


@st.composite
def model_and_input(draw):
    b = draw(st.integers(1, 4))
    m = DiscriminatorModel(b, draw(st.frozensets(st.integers(1, 2**b))))
    x = draw(st.lists(st.integers(0, 1), min_size=b, max_size=b))
    return m, x


class TestNoisyInfer:
    @settings(max_examples=100, deadline=None)
    @given(model_and_input(), st.integers(1, 9), st.integers(0, 2**32))
    def test_noise_free_matches_circuit(self, mx, shots, seed):
        m, x = mx
        c = synthesize(m)
        assert bench.noisy_infer(c, x, NoiseConfig(0, 0, shots), seed) == circuit_predict(c, x)

    def test_certain_readout_flip(self):
        assert bench.noisy_infer(Circuit(3), [0, 1], NoiseConfig(1.0, 0.0, 1), 0) == 1

    def test_certain_gate_flip(self):
        c = Circuit(2, (GateOp.cx(0, 1),))
        assert bench.noisy_infer(c, [0], NoiseConfig(0.0, 1.0, 1), 0) == 1
        # single-qubit gates are noiseless
        c = Circuit(2, (GateOp.x(0),))
        assert bench.noisy_infer(c, [0], NoiseConfig(0.0, 1.0, 1), 0) == 0

    def test_readout_flip_rate(self):
        noise = NoiseConfig(0.035, 0.0, 1)
        rng = np.random.default_rng(2024)
        seeds = rng.integers(0, 2**63 - 1, size=100_000)
        rate = np.mean([bench.noisy_infer(Circuit(3), [1, 0], noise, s) for s in seeds])
        assert abs(rate - 0.035) <= 0.005

    def test_ties_break_to_one(self):
        # with two fair-coin shots, P(at least one 1) = 3/4 when ties go to 1
        noise = NoiseConfig(0.5, 0.0, 2)
        rate = np.mean([bench.noisy_infer(Circuit(2), [0], noise, s) for s in range(8000)])
        assert abs(rate - 0.75) <= 0.03

    def test_width_checked(self):
        with pytest.raises(ValueError):
            bench.noisy_infer(Circuit(3), [0], NoiseConfig(), 0)


class TestEmit:
    def test_files(self, tmp_path):
        cfg = iris(8, trials=30)
        stats, results = bench.run_experiment(cfg)
        jp, cp = bench.emit_results(cfg, stats, results, tmp_path / "a")
        doc = json.loads(jp.read_text())
        assert set(doc) == {"config", "stats", "trials"}
        assert {"accuracy", "precision", "recall", "fnr"} <= set(doc["stats"])
        assert set(doc["stats"]["accuracy"]) == {"mean", "std", "min", "max", "median"}
        assert doc["trials"][0].keys() == {"trial", "accuracy", "tp", "fp", "tn", "fn"}
        assert doc["config"]["train_size"] == 8
        rows = list(csv.reader(cp.open()))
        assert rows[0] == ["bin_lower", "bin_upper", "count"]
        assert sum(int(r[2]) for r in rows[1:]) == 30

    def test_byte_stable(self, tmp_path):
        cfg = iris(8, trials=30, noise=NoiseConfig(shots=3))
        for d in ("a", "b"):
            stats, results = bench.run_experiment(cfg, threads=2 if d == "b" else 1)
            bench.emit_results(cfg, stats, results, tmp_path / d)
        for name in ("results.json", "histogram.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_empty(self, tmp_path):
        stats, _ = bench.run_experiment(iris(8, trials=2))
        with pytest.raises(ValueError):
            bench.emit_results(iris(8), stats, [], tmp_path)

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        stats, results = bench.run_experiment(iris(8, trials=2))
        with pytest.raises(OSError):
            bench.emit_results(iris(8), stats, results, blocker / "sub")
