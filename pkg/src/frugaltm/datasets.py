"""Dataset ingestion, booleanization and train/test splitting.

Numeric features are booleanized by thermometer thresholds: with ``b`` bits
per feature the thresholds sit at the ``i / (b + 1)`` quantiles (``i = 1..b``)
of the fitting data, and bit ``i`` is set iff the value is strictly greater
than threshold ``i``.  Thresholds are fitted on the training split only.

CSV format: a header row, numeric feature columns, and a final integer
``label`` column.  Comma-delimited, standard :mod:`csv` quoting.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .rng import RngStream

log = logging.getLogger(__name__)

MNIST_PIXEL_THRESHOLD = 75


@dataclass
class RawDataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, idx) -> "RawDataset":
        return RawDataset(self.features[idx], self.labels[idx], self.class_count, self.feature_names)


@dataclass
class BooleanizedDataset:
    X: np.ndarray  # (N, L) uint8
    y: np.ndarray  # (N,) int
    class_count: int

    def __post_init__(self) -> None:
        self.X = np.ascontiguousarray(self.X, dtype=np.uint8)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError("X must be (N, L) with one label per row")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= self.class_count):
            raise ValueError("labels must lie in [0, class_count)")

    @property
    def L(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "BooleanizedDataset":
        return BooleanizedDataset(self.X[idx], self.y[idx], self.class_count)

    @property
    def points(self):
        return [(tuple(int(b) for b in row), int(lab)) for row, lab in zip(self.X, self.y)]


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


def xor_dataset() -> BooleanizedDataset:
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8)
    return BooleanizedDataset(X, X[:, 0] ^ X[:, 1], 2)


class Booleanizer:
    """Quantile thermometer encoder."""

    def __init__(self, bits_per_feature: int):
        if bits_per_feature < 1:
            raise ValueError("bits_per_feature must be >= 1")
        self.bits = bits_per_feature
        self.thresholds: np.ndarray | None = None

    def fit(self, features: np.ndarray) -> "Booleanizer":
        features = np.asarray(features, dtype=float)
        if not np.isfinite(features).all():
            raise ValueError("features must be finite")
        qs = np.arange(1, self.bits + 1) / (self.bits + 1)
        self.thresholds = np.quantile(features, qs, axis=0).T  # (F, bits)
        constant = np.ptp(features, axis=0) == 0
        if constant.any():
            log.warning("constant feature(s) %s booleanize to constant bits", np.flatnonzero(constant).tolist())
        return self

    def transform(self, features: np.ndarray) -> np.ndarray:
        if self.thresholds is None:
            raise RuntimeError("fit() first")
        features = np.asarray(features, dtype=float)
        bits = features[:, :, None] > self.thresholds[None, :, :]
        return bits.reshape(len(features), -1).astype(np.uint8)


def booleanize(raw: RawDataset, bits_per_feature: int, fit_on: RawDataset | None = None) -> BooleanizedDataset:
    """Encode ``raw``; thresholds come from ``fit_on`` (default: ``raw`` itself)."""
    enc = Booleanizer(bits_per_feature).fit((fit_on or raw).features)
    return BooleanizedDataset(enc.transform(raw.features), raw.labels, raw.class_count)


def split(ds, spec: SplitSpec):
    """Shuffle with ``spec.shuffle_seed`` and cut at ``floor(f * N)``."""
    n = len(ds)
    if n < 2:
        raise ValueError("need at least 2 points to split")
    order = np.array(RngStream.pcg64(spec.shuffle_seed).shuffle(list(range(n))), dtype=np.int64)
    cut = min(max(int(np.floor(spec.train_fraction * n)), 1), n - 1)
    return ds.subset(order[:cut]), ds.subset(order[cut:])


def split_booleanize(raw: RawDataset, bits_per_feature: int, spec: SplitSpec):
    """Split raw data, then booleanize both sides with train-fitted thresholds."""
    train, test = split(raw, spec)
    enc = Booleanizer(bits_per_feature).fit(train.features)
    return (
        BooleanizedDataset(enc.transform(train.features), train.labels, raw.class_count),
        BooleanizedDataset(enc.transform(test.features), test.labels, raw.class_count),
    )


def load_csv(path) -> RawDataset:
    path = Path(path)
    with path.open(newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        if not header or header[-1].strip().lower() != "label":
            raise ValueError(f"{path}: last column must be 'label'")
        rows = [r for r in reader if r]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except ValueError as e:
        raise ValueError(f"{path}: non-numeric value ({e})") from None
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    labels = data[:, -1].astype(np.int64)
    if (labels != data[:, -1]).any() or labels.min() < 0:
        raise ValueError(f"{path}: labels must be non-negative integers")
    return RawDataset(data[:, :-1], labels, int(labels.max()) + 1, tuple(header[:-1]))


def _bundled(name: str) -> RawDataset:
    with resources.as_file(resources.files("frugaltm") / "data" / f"{name}.csv") as p:
        return load_csv(p)


def load_iris() -> RawDataset:
    """150 points, 4 features, 3 classes (bundled copy of the UCI data)."""
    return _bundled("iris")


def load_breast_cancer() -> RawDataset:
    """569 points, 30 features, 2 classes (bundled UCI Wisconsin diagnostic)."""
    return _bundled("breast_cancer")


BUNDLED = {"iris": (load_iris, 4), "breast_cancer": (load_breast_cancer, 10)}


def load_mnist_csv(path, threshold: int = MNIST_PIXEL_THRESHOLD) -> BooleanizedDataset:
    """MNIST in ``label``-last CSV form; pixel > threshold becomes 1 (L = 784)."""
    raw = load_csv(path)
    return BooleanizedDataset((raw.features > threshold).astype(np.uint8), raw.labels, max(raw.class_count, 10))
