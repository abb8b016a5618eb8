"""Iris and 3x3 bars-and-stripes data, and their binary feature extractors."""

from __future__ import annotations

import csv
import enum
import io
import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_binary_features, check_binary_labels


class DataError(ValueError):
    """Malformed input data; the message names the offending row."""


class Species(enum.Enum):
    SETOSA = "Iris-setosa"
    VERSICOLOR = "Iris-versicolor"
    VIRGINICA = "Iris-virginica"

    @classmethod
    def parse(cls, text: str) -> "Species":
        key = text.strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown species {text!r}")


@dataclass(frozen=True)
class IrisDatum:
    sepal_length_cm: float
    sepal_width_cm: float
    petal_length_cm: float
    petal_width_cm: float
    species: Species

    def __post_init__(self):
        if min(self.measurements) <= 0:
            raise ValueError("measurements must be positive")

    @property
    def measurements(self) -> tuple[float, float, float, float]:
        return (self.sepal_length_cm, self.sepal_width_cm, self.petal_length_cm, self.petal_width_cm)


@dataclass(frozen=True)
class ThresholdRegime:
    sepal_length_threshold_cm: float = 5.50
    sepal_width_threshold_cm: float = 3.00
    petal_length_threshold_cm: float = 3.00

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_tuple())):
            raise ValueError("thresholds must be finite")

    def as_tuple(self) -> tuple[float, float, float]:
        return (
            self.sepal_length_threshold_cm,
            self.sepal_width_threshold_cm,
            self.petal_length_threshold_cm,
        )

    @classmethod
    def parse(cls, text: str) -> "ThresholdRegime":
        """Parse ``"5.5,3.0,3.0"`` (sepal length, sepal width, petal length)."""
        parts = [p for p in text.replace(" ", ",").split(",") if p]
        if len(parts) != 3:
            raise ValueError(f"expected 3 thresholds, got {len(parts)}")
        return cls(*(float(p) for p in parts))


@dataclass(frozen=True)
class LabeledDataset:
    data: tuple
    labels: tuple[int, ...]
    provenance: str = ""

    def __post_init__(self):
        if len(self.data) != len(self.labels):
            raise ValueError("data and labels differ in length")

    def __len__(self):
        return len(self.data)


@dataclass(frozen=True)
class LabeledFeatureSet:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = check_binary_features(self.features)
        y = check_binary_labels(self.labels, len(X))
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self):
        return len(self.labels)

    @property
    def width(self) -> int:
        return self.features.shape[1]


# -- Iris -------------------------------------------------------------------


def load_iris(source: IO[str] | str) -> list[IrisDatum]:
    """Parse ``sepal_length,sepal_width,petal_length,petal_width,species`` rows.

    A first row whose leading field is not numeric is taken as a header.
    Blank lines are skipped. Errors carry the 1-based row number.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    data = []
    for rownum, row in enumerate(csv.reader(source), start=1):
        if not row or all(not cell.strip() for cell in row):
            continue
        if rownum == 1 and not _is_number(row[0]):
            continue
        if len(row) != 5:
            raise DataError(f"row {rownum}: expected 5 fields, got {len(row)}")
        try:
            values = [float(cell) for cell in row[:4]]
        except ValueError:
            raise DataError(f"row {rownum}: non-numeric measurement in {row[:4]}") from None
        try:
            species = Species.parse(row[4])
            data.append(IrisDatum(*values, species))
        except ValueError as exc:
            raise DataError(f"row {rownum}: {exc}") from None
    return data


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def bundled_iris_csv() -> str:
    """The 150-row Iris table shipped with scikit-learn, in the canonical CSV layout."""
    from sklearn.datasets import load_iris as _sk_load_iris

    bunch = _sk_load_iris()
    names = [s.value for s in Species]
    out = io.StringIO()
    out.write("sepal_length,sepal_width,petal_length,petal_width,species\n")
    for row, target in zip(bunch.data, bunch.target):
        out.write(",".join(f"{v:g}" for v in row) + f",{names[target]}\n")
    return out.getvalue()


def iris_binary_subset(data: Iterable[IrisDatum]) -> LabeledDataset:
    """Setosa rows labeled 0 and Virginica rows labeled 1, in input order."""
    label_of = {Species.SETOSA: 0, Species.VIRGINICA: 1}
    kept = [d for d in data if d.species in label_of]
    return LabeledDataset(
        tuple(kept),
        tuple(label_of[d.species] for d in kept),
        provenance="iris: setosa->0, virginica->1",
    )


def iris_features(datum: IrisDatum, regime: ThresholdRegime = ThresholdRegime()) -> tuple[int, int, int]:
    """Strictly-above-threshold bits for sepal length, sepal width and petal length."""
    values = (datum.sepal_length_cm, datum.sepal_width_cm, datum.petal_length_cm)
    return tuple(int(v > t) for v, t in zip(values, regime.as_tuple()))


class IrisBinarizer(TransformerMixin, BaseEstimator):
    """Threshold the first three Iris measurements into 3 bits.

    Accepts an ``(n, >=3)`` array of measurements in column order sepal
    length, sepal width, petal length[, petal width]; extra columns are
    ignored.
    """

    def __init__(self, sepal_length=5.50, sepal_width=3.00, petal_length=3.00):
        self.sepal_length = sepal_length
        self.sepal_width = sepal_width
        self.petal_length = petal_length

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] < 3:
            raise ValueError("expected a 2-D array with at least 3 measurement columns")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        thresholds = np.array([self.sepal_length, self.sepal_width, self.petal_length])
        return (X[:, :3] > thresholds).astype(np.uint8)


# -- Bars and stripes ---------------------------------------------------------


class GridKind(enum.Enum):
    BAR = "bar"
    STRIPE = "stripe"


@dataclass(frozen=True)
class BASGrid:
    """A 3x3 grid with one lit rectangle that is wider than tall (bar) or taller than wide (stripe)."""

    cells: tuple[tuple[int, ...], ...]
    kind: GridKind = field(default=None)

    def __post_init__(self):
        cells = tuple(tuple(int(c) for c in row) for row in self.cells)
        if len(cells) != 3 or any(len(r) != 3 for r in cells):
            raise ValueError("grid must be 3x3")
        if any(c not in (0, 1) for r in cells for c in r):
            raise ValueError("cells must be 0/1")
        object.__setattr__(self, "cells", cells)
        geometric = _classify(cells)
        if geometric is None:
            raise ValueError("grid is neither a bar nor a stripe")
        if self.kind is None:
            object.__setattr__(self, "kind", geometric)
        elif GridKind(self.kind) is not geometric:
            raise ValueError(f"grid geometry says {geometric.value}, got {self.kind}")
        else:
            object.__setattr__(self, "kind", GridKind(self.kind))

    @property
    def bitstring(self) -> str:
        return "".join(str(c) for row in self.cells for c in row)

    @classmethod
    def from_bitstring(cls, bits: str, kind=None) -> "BASGrid":
        if len(bits) != 9 or set(bits) - {"0", "1"}:
            raise ValueError(f"expected 9 characters of 0/1, got {bits!r}")
        cells = tuple(tuple(int(c) for c in bits[r * 3 : r * 3 + 3]) for r in range(3))
        return cls(cells, None if kind is None else GridKind(kind))

    def transpose(self) -> "BASGrid":
        return BASGrid(tuple(zip(*self.cells)))

    def to_dict(self) -> dict:
        return {"cells": self.bitstring, "kind": self.kind.value}


def _classify(cells) -> GridKind | None:
    lit = np.argwhere(np.array(cells) == 1)
    if lit.size == 0:
        return None
    (r0, c0), (r1, c1) = lit.min(axis=0), lit.max(axis=0)
    height, width = r1 - r0 + 1, c1 - c0 + 1
    if len(lit) != height * width:
        return None  # lit cells do not fill their bounding box
    if width > height:
        return GridKind.BAR
    if height > width:
        return GridKind.STRIPE
    return None


def bas_enumerate() -> list[BASGrid]:
    """All 22 grids (11 bars, then 11 stripes), each kind sorted by cell bits."""
    grids = []
    for top, left, height, width in itertools.product(range(3), range(3), range(1, 4), range(1, 4)):
        if top + height > 3 or left + width > 3 or width == height:
            continue
        cells = np.zeros((3, 3), dtype=int)
        cells[top : top + height, left : left + width] = 1
        grids.append(BASGrid(tuple(map(tuple, cells))))
    order = {GridKind.BAR: 0, GridKind.STRIPE: 1}
    return sorted(grids, key=lambda g: (order[g.kind], g.bitstring))


def bas_label(grid: BASGrid) -> int:
    return 0 if grid.kind is GridKind.BAR else 1


def bas_sample(n: int, seed: int) -> LabeledDataset:
    """``n`` grids drawn uniformly with replacement from the 22 enumerated grids."""
    if n < 1:
        raise ValueError("n must be >= 1")
    grids = bas_enumerate()
    picks = np.random.default_rng(seed).integers(0, len(grids), size=n)
    chosen = tuple(grids[i] for i in picks)
    return LabeledDataset(
        chosen, tuple(bas_label(g) for g in chosen), provenance=f"bas: n={n}, seed={seed}"
    )


def bas_features(grid: BASGrid) -> tuple[int, ...]:
    """Nine bits read row-major, 1 where the cell is lit."""
    return tuple(c for row in grid.cells for c in row)


# -- Labeled feature files and separability -----------------------------------


def load_labeled_features(source: IO[str] | str) -> LabeledFeatureSet:
    """Read ``<bitstring> <label>`` records, one per line; ``#`` lines are comments."""
    if isinstance(source, str):
        source = io.StringIO(source)
    rows, labels = [], []
    width = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DataError(f"line {lineno}: expected '<bitstring> <label>', got {line!r}")
        bits, label = parts
        if not bits or set(bits) - {"0", "1"}:
            raise DataError(f"line {lineno}: feature string must be 0/1, got {bits!r}")
        if label not in ("0", "1"):
            raise DataError(f"line {lineno}: label must be 0 or 1, got {label!r}")
        if width is None:
            width = len(bits)
        elif len(bits) != width:
            raise DataError(f"line {lineno}: feature width {len(bits)} differs from {width}")
        rows.append([int(c) for c in bits])
        labels.append(int(label))
    if not rows:
        raise DataError("no records found")
    return LabeledFeatureSet(np.array(rows, dtype=np.uint8), np.array(labels, dtype=np.int8))


@dataclass(frozen=True)
class SeparabilityReport:
    separable: bool
    distinct_patterns: int
    conflicts: list


def separability_check(features, labels) -> SeparabilityReport:
    """A feature set is separable when no bit pattern carries both labels."""
    X = check_binary_features(features)
    y = check_binary_labels(labels, len(X))
    seen = defaultdict(set)
    for row, label in zip(map(tuple, X.tolist()), y.tolist()):
        seen[row].add(label)
    conflicts = sorted(p for p, ls in seen.items() if len(ls) > 1)
    return SeparabilityReport(not conflicts, len(seen), conflicts)


def iris_feature_set(
    data: Sequence[IrisDatum], regime: ThresholdRegime = ThresholdRegime()
) -> LabeledFeatureSet:
    subset = iris_binary_subset(data)
    X = np.array([iris_features(d, regime) for d in subset.data], dtype=np.uint8).reshape(-1, 3)
    return LabeledFeatureSet(X, np.array(subset.labels, dtype=np.int8))


def bas_feature_set(dataset: LabeledDataset) -> LabeledFeatureSet:
    X = np.array([bas_features(g) for g in dataset.data], dtype=np.uint8).reshape(-1, 9)
    return LabeledFeatureSet(X, np.array(dataset.labels, dtype=np.int8))
