"""Monte-Carlo train/validate experiments for the discriminator.

Trial ``i`` draws from its own generator seeded with
``numpy.random.SeedSequence([master_seed, i])``, so results depend only on
the configuration and never on execution order or thread count.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import datasets, qcore
from .datasets import LabeledFeatureSet, ThresholdRegime
from .discriminator import train
from .qcore import Circuit
from .synth import circuit_predict, synthesize

log = logging.getLogger(__name__)

DATASETS = ("iris", "bas")
BAS_DATASET_SIZE = 100
HISTOGRAM_BIN_WIDTH = 2.5


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseConfig:
    readout_flip_prob: float = 0.035
    gate_flip_prob: float = 0.015
    shots: int = 1024

    def __post_init__(self):
        for name in ("readout_flip_prob", "gate_flip_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {p}")
        if self.shots < 1:
            raise ConfigError(f"shots must be >= 1, got {self.shots}")

    @classmethod
    def parse(cls, text: str) -> "NoiseConfig":
        """Parse ``readout=p,gate=q,shots=k``; omitted keys keep their defaults."""
        keys = {"readout": ("readout_flip_prob", float), "gate": ("gate_flip_prob", float), "shots": ("shots", int)}
        kwargs = {}
        for item in filter(None, text.split(",")):
            key, sep, value = item.partition("=")
            if not sep or key.strip() not in keys:
                raise ConfigError(f"bad noise setting {item!r}")
            name, conv = keys[key.strip()]
            try:
                kwargs[name] = conv(value)
            except ValueError:
                raise ConfigError(f"bad value in noise setting {item!r}") from None
        return cls(**kwargs)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    train_size: int
    trials: int = 300
    master_seed: int = 0
    noise: NoiseConfig | None = None
    regime: ThresholdRegime = field(default_factory=ThresholdRegime)
    iris_csv: str | None = None
    bas_size: int = BAS_DATASET_SIZE

    def __post_init__(self):
        if self.dataset not in DATASETS:
            raise ConfigError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.train_size < 1:
            raise ConfigError("train_size must be >= 1")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["noise"] = None if self.noise is None else asdict(self.noise)
        return out


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    predictions: tuple[int, ...]
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def size(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.size

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 1.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 1.0

    @property
    def fnr(self) -> float:
        return 1.0 - self.recall

    @property
    def fpr(self) -> float:
        return self.fp / (self.fp + self.tn) if self.fp + self.tn else 0.0

    def row(self) -> dict:
        return {
            "trial": self.trial_index,
            "accuracy": self.accuracy,
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
        }


def confusion(predicted, actual) -> tuple[int, int, int, int]:
    p = np.asarray(predicted, dtype=bool)
    y = np.asarray(actual, dtype=bool)
    return (int(np.sum(p & y)), int(np.sum(p & ~y)), int(np.sum(~p & ~y)), int(np.sum(~p & y)))


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    std: float
    min: float
    max: float
    median: float

    @classmethod
    def of(cls, values) -> "MetricSummary":
        v = np.asarray(values, dtype=float)
        # population std (divisor = number of trials)
        return cls(float(v.mean()), float(v.std()), float(v.min()), float(v.max()), float(np.median(v)))


@dataclass(frozen=True)
class ExperimentStats:
    accuracy: MetricSummary
    precision: MetricSummary
    recall: MetricSummary
    fpr: MetricSummary
    fnr: MetricSummary
    histogram: tuple[tuple[float, float, int], ...]
    trials: int

    def to_dict(self) -> dict:
        return {
            name: asdict(getattr(self, name))
            for name in ("accuracy", "precision", "recall", "fpr", "fnr")
        }


def accuracy_histogram(accuracies, bin_width: float = HISTOGRAM_BIN_WIDTH):
    """Counts of accuracy percentages in ``[lo, hi)`` bins over 0..100; 100 lands in the top bin."""
    nbins = int(round(100 / bin_width))
    pct = np.asarray(accuracies, dtype=float) * 100.0
    idx = np.clip(np.floor(pct / bin_width + 1e-9).astype(int), 0, nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    return tuple((k * bin_width, (k + 1) * bin_width, int(counts[k])) for k in range(nbins))


def summarize(results) -> ExperimentStats:
    if not results:
        raise ValueError("no trials to summarize")
    metric = lambda name: MetricSummary.of([getattr(r, name) for r in results])  # noqa: E731
    return ExperimentStats(
        accuracy=metric("accuracy"),
        precision=metric("precision"),
        recall=metric("recall"),
        fpr=metric("fpr"),
        fnr=metric("fnr"),
        histogram=accuracy_histogram([r.accuracy for r in results]),
        trials=len(results),
    )


# -- data ---------------------------------------------------------------------


@lru_cache(maxsize=16)
def _iris_feature_set(iris_csv: str | None, regime: ThresholdRegime) -> LabeledFeatureSet:
    if iris_csv is None:
        text = datasets.bundled_iris_csv()
    else:
        text = Path(iris_csv).read_text(encoding="utf-8")
    return datasets.iris_feature_set(datasets.load_iris(text), regime)


@lru_cache(maxsize=16)
def _bas_feature_set(size: int, seed: int) -> LabeledFeatureSet:
    return datasets.bas_feature_set(datasets.bas_sample(size, seed))


def load_feature_set(config: ExperimentConfig) -> LabeledFeatureSet:
    """The full labeled feature set a configuration partitions.

    The BAS set is drawn once per configuration, seeded by ``master_seed``.
    """
    if config.dataset == "iris":
        return _iris_feature_set(config.iris_csv, config.regime)
    return _bas_feature_set(config.bas_size, config.master_seed)


def trial_seed(master_seed: int, trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, trial_index])


# -- inference ----------------------------------------------------------------


def noisy_infer(circuit: Circuit, x, noise: NoiseConfig, seed) -> int:
    """Majority-vote prediction bit over ``noise.shots`` noisy executions of ``circuit`` on ``|x 0>``.

    Per shot, every multi-qubit gate acts and then flips its target with
    ``gate_flip_prob``; afterwards each qubit's readout flips independently
    with ``readout_flip_prob``. Ties go to 1.
    """
    n = circuit.num_qubits
    if len(x) + 1 != n:
        raise qcore.CircuitError(f"input has {len(x)} bits but the circuit expects {n - 1}")
    rng = np.random.default_rng(seed)
    start = int("".join(str(int(v)) for v in (*x, 0)), 2)
    states = np.full(noise.shots, start, dtype=np.int64)
    for gate in circuit.gates:
        states = qcore.apply_gate_to_indices(states, gate, n)
        if gate.controls:
            flip = rng.random(noise.shots) < noise.gate_flip_prob
            states ^= flip.astype(np.int64) << (n - 1 - gate.target)
    readout_flips = rng.random((noise.shots, n)) < noise.readout_flip_prob
    p = (states & 1).astype(bool) ^ readout_flips[:, -1]
    return int(2 * int(p.sum()) >= noise.shots)


def partition(size: int, train_size: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random ``train_size``-subset (without replacement) and its complement."""
    order = rng.permutation(size)
    return order[:train_size], order[train_size:]


def run_trial(config: ExperimentConfig, seed, trial_index: int = 0) -> TrialResult:
    """Partition, train, infer through the synthesized circuit, and score one trial.

    ``seed`` is anything ``numpy.random.default_rng`` accepts; the result is
    a pure function of ``(config, seed)``.
    """
    data = load_feature_set(config)
    size = len(data)
    if config.train_size >= size:
        raise ConfigError(
            f"train_size {config.train_size} leaves no validation data (dataset size {size})"
        )
    rng = np.random.default_rng(seed)
    train_idx, val_idx = partition(size, config.train_size, rng)
    model = train(data.features[train_idx], data.labels[train_idx])
    circuit = synthesize(model)
    X_val, y_val = data.features[val_idx], data.labels[val_idx]
    if config.noise is None:
        preds = [circuit_predict(circuit, x) for x in X_val]
    else:
        point_seeds = rng.integers(0, 2**63 - 1, size=len(X_val))
        preds = [noisy_infer(circuit, x, config.noise, s) for x, s in zip(X_val, point_seeds)]
    tp, fp, tn, fn = confusion(preds, y_val)
    return TrialResult(trial_index, tuple(int(p) for p in preds), tp, fp, tn, fn)


def default_threads() -> int:
    env = os.environ.get("QDISC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"QDISC_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig, threads: int | None = None):
    """Run every trial and aggregate. Returns ``(stats, results)`` with results in trial order."""
    data = load_feature_set(config)
    if config.train_size >= len(data):
        raise ConfigError(
            f"train_size {config.train_size} leaves no validation data (dataset size {len(data)})"
        )
    threads = threads or default_threads()
    jobs = [(trial_seed(config.master_seed, i), i) for i in range(config.trials)]
    log.info("running %d trials of %s N=%d on %d thread(s)", config.trials, config.dataset, config.train_size, threads)
    if threads == 1:
        results = [run_trial(config, s, i) for s, i in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: run_trial(config, *job), jobs))
    return summarize(results), results


# -- output -------------------------------------------------------------------


def results_document(config: ExperimentConfig, stats: ExperimentStats, results) -> dict:
    return {
        "config": config.to_dict(),
        "stats": stats.to_dict(),
        "trials": [r.row() for r in results],
    }


def emit_results(config: ExperimentConfig, stats: ExperimentStats, results, destination) -> tuple[Path, Path]:
    """Write ``results.json`` and ``histogram.csv`` under ``destination``."""
    if not results:
        raise ValueError("no trial results to emit")
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / "results.json"
    json_path.write_text(
        json.dumps(results_document(config, stats, results), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bin_lower", "bin_upper", "count"])
    for lo, hi, count in stats.histogram:
        writer.writerow([lo, hi, count])
    csv_path = out / "histogram.csv"
    csv_path.write_text(buf.getvalue(), encoding="utf-8")
    return json_path, csv_path
