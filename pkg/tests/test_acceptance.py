"""Exit criteria for the package, one test per criterion.

Every test records a PASS/FAIL line that is printed in the terminal
summary. Monte-Carlo runs use master seed 7.
"""

import math
import time
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qdisc import bench, datasets, qcore
from qdisc.bench import ExperimentConfig, NoiseConfig
from qdisc.discriminator import DiscriminatorModel, build_unitary, predict_many, train
from qdisc.synth import all_patterns, appendix_fixtures, check_fixture, circuit_predict, synthesize

SEED = 7
pytestmark = pytest.mark.slow


def record(criterion, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


@lru_cache(maxsize=None)
def experiment(dataset, n, trials, noise=None):
    start = time.perf_counter()
    stats, results = bench.run_experiment(ExperimentConfig(dataset, n, trials, SEED, noise=noise))
    return stats, results, time.perf_counter() - start


def random_model(rng, b):
    density = rng.random()
    theta = np.flatnonzero(rng.random(2**b) < density) + 1
    return DiscriminatorModel(b, frozenset(theta.tolist()))


def test_01_appendix_exhaustive():
    checks = [check_fixture(f) for f in appendix_fixtures()]
    passed = sum(c.passed for c in checks)
    ok = passed == 16
    record(1, ok, f"two-bit suite {passed}/16 (training 4/4, matrix exact, both circuits verify)")
    assert ok, [c for c in checks if not c.passed]


def test_02_unitarity():
    rng = np.random.default_rng(SEED)
    failures = 0
    for _ in range(1000):
        U = build_unitary(random_model(rng, int(rng.integers(1, 9))))
        eye = np.eye(U.shape[0])
        if not (qcore.is_permutation_matrix(U) and np.array_equal(U.conj().T @ U, eye)):
            failures += 1
    ok = failures == 0
    record(2, ok, f"1000 random models, b in 1..8: {failures} non-unitary/non-permutation")
    assert ok


def test_03_oracle_equivalence():
    rng = np.random.default_rng(SEED + 1)
    mismatches = 0
    checked = 0
    for b in range(1, 7):
        X = all_patterns(b)
        for _ in range(200):
            m = random_model(rng, b)
            lookup = predict_many(m, X).tolist()
            U = build_unitary(m)
            # input |x 0> sits at basis index 2 * offset(x); its image is a basis column
            matrix = [int(np.argmax(np.abs(U[:, 2 * k]))) & 1 for k in range(2**b)]
            circuit = synthesize(m)
            simulated = [circuit_predict(circuit, x) for x in X]
            mismatches += sum(not (a == c == d) for a, c, d in zip(lookup, matrix, simulated))
            checked += len(X)
    ok = mismatches == 0
    record(3, ok, f"circuit/matrix/lookup over {checked} (model, input) pairs: {mismatches} mismatches")
    assert ok


def test_04_iris_n80():
    stats, _, elapsed = experiment("iris", 80, 300)
    mean, std = 100 * stats.accuracy.mean, 100 * stats.accuracy.std
    ok = 97.3 <= mean <= 100 and std <= 4 and elapsed <= 60
    record(4, ok, f"iris N=80: mean {mean:.2f}% in [97.3, 100], std {std:.2f}% <= 4, {elapsed:.1f}s <= 60s")
    assert ok


def test_05_iris_n8():
    stats, _, _ = experiment("iris", 8, 300)
    mean, std = 100 * stats.accuracy.mean, 100 * stats.accuracy.std
    ok = 91 <= mean <= 98.5 and std <= 14
    record(5, ok, f"iris N=8: mean {mean:.2f}% in [91, 98.5], std {std:.2f}% <= 14")
    assert ok


def test_06a_iris_n4_zero_false_positives():
    _, results, _ = experiment("iris", 4, 600)
    worst = max(r.fp for r in results)
    ok = worst == 0
    record("6a", ok, f"iris N=4: max FP over 600 trials = {worst} (precision 1.0 in every trial)")
    assert ok


def test_06b_iris_n4_accuracy():
    stats, _, _ = experiment("iris", 4, 600)
    mean = 100 * stats.accuracy.mean
    ok = 80 <= mean <= 89
    record("6b", ok, f"iris N=4: mean accuracy {mean:.2f}% in [80, 89]")
    assert ok


def test_06c_iris_n4_fnr():
    stats, _, _ = experiment("iris", 4, 600)
    ok = 0.25 <= stats.fnr.mean <= 0.37
    record("6c", ok, f"iris N=4: mean FNR {stats.fnr.mean:.4f} in [0.25, 0.37]")
    assert ok


def test_06d_iris_n4_fnr_skew_right():
    stats, results, _ = experiment("iris", 4, 600)
    fnr = np.array([r.fnr for r in results])
    moment_skew = float(np.mean((fnr - fnr.mean()) ** 3) / fnr.std() ** 3)
    ok = stats.fnr.median <= stats.fnr.mean
    record(
        "6d",
        ok,
        f"iris N=4: median FNR {stats.fnr.median:.4f} vs mean FNR {stats.fnr.mean:.4f}, "
        f"need median <= mean (moment skewness {moment_skew:+.3f})",
    )
    assert ok


def test_07_bas_n80():
    stats, _, _ = experiment("bas", 80, 300)
    mean = 100 * stats.accuracy.mean
    ok = 95.4 <= mean <= 100
    record(7, ok, f"bas N=80: mean {mean:.2f}% in [95.4, 100]")
    assert ok


def test_08_bas_n11():
    stats, _, _ = experiment("bas", 11, 300)
    mean = 100 * stats.accuracy.mean
    ok = 66 <= mean <= 76
    record(8, ok, f"bas N=11: mean {mean:.2f}% in [66, 76]")
    assert ok


def test_09_dataset_structure(iris_data):
    subset = datasets.iris_binary_subset(iris_data)
    fs = datasets.iris_feature_set(iris_data)
    report = datasets.separability_check(fs.features, fs.labels)
    grids = datasets.bas_enumerate()
    bars = sum(g.kind is datasets.GridKind.BAR for g in grids)
    counts = (len(subset), subset.labels.count(0), subset.labels.count(1))
    ok = counts == (100, 50, 50) and report.distinct_patterns == 6 and report.separable and (bars, len(grids) - bars) == (11, 11)
    record(
        9,
        ok,
        f"iris subset {counts[0]} ({counts[1]}/{counts[2]}), {report.distinct_patterns} patterns, "
        f"separable={report.separable}; bas {bars} bars + {len(grids) - bars} stripes",
    )
    assert ok


def test_10_noise_degrades():
    clean, clean_results, _ = experiment("iris", 80, 300)
    noisy, noisy_results, _ = experiment("iris", 80, 300, NoiseConfig(0.035, 0.015, 1))
    gap = 100 * (clean.accuracy.mean - noisy.accuracy.mean)
    paired = all(a.size == b.size for a, b in zip(clean_results, noisy_results))
    ok = gap >= 2 and paired
    record(10, ok, f"iris N=80 noisy (1 shot) {100 * noisy.accuracy.mean:.2f}% vs noiseless "
                   f"{100 * clean.accuracy.mean:.2f}%: gap {gap:.2f} points >= 2")
    assert ok


def _time_training(X, y, repeats=5):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        train(X, y)
        best = min(best, time.perf_counter() - start)
    return best


def test_11_training_complexity():
    rng = np.random.default_rng(SEED)
    sizes = [2**k for k in range(10, 21)]
    times = []
    for n in sizes:
        b = math.ceil(math.log2(n))
        X = rng.integers(0, 2, size=(n, b), dtype=np.uint8)
        y = rng.integers(0, 2, size=n, dtype=np.int8)
        times.append(_time_training(X, y))
    times = np.array(times)
    nlogn = np.array([n * math.log2(n) for n in sizes])
    # t(N) ~ a + c N log N with a, c >= 0
    from scipy.optimize import nnls

    (a, c), _ = nnls(np.column_stack([np.ones_like(nlogn), nlogn]), times)
    fitted = a + c * nlogn
    r2 = 1 - np.sum((times - fitted) ** 2) / np.sum((times - times.mean()) ** 2)
    ratios = times[1:] / times[:-1]
    ok = c > 0 and r2 >= 0.95 and ratios.max() <= 2.6
    record(
        11,
        ok,
        f"train time N=2^10..2^20: fit c={c:.3g}s per N log N, R^2={r2:.3f} >= 0.95, "
        f"max t(2N)/t(N)={ratios.max():.2f} <= 2.6",
    )
    assert ok
