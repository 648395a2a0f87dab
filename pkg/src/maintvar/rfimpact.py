"""Random-forest regression of daily generation on same-day indicators.

This is an impact analysis: it explains a day's generation from that
day's maintenance and weather flags. It is not a leak-free forecaster.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from maintvar import kernels
from maintvar.errors import DimensionMismatch, NoFeatures, TooFewRows
from maintvar.rng import stream
from maintvar.textfeat import FeatureMatrix


@dataclass(frozen=True)
class RFConfig:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 2
    seed: int = 0


@dataclass(frozen=True)
class Tree:
    """Flattened CART tree; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gains: np.ndarray  # per-feature SSE decrease

    def predict(self, X: np.ndarray) -> np.ndarray:
        return kernels.predict_tree(self.feature, self.threshold, self.left, self.right, self.value, X)

    @property
    def n_splits(self) -> int:
        return int(np.count_nonzero(self.feature >= 0))


@dataclass(frozen=True)
class RandomForestModel:
    trees: tuple[Tree, ...]
    feature_labels: tuple[str, ...]
    config: RFConfig

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def has_splits(self) -> bool:
        return any(t.n_splits for t in self.trees)

    @property
    def importances(self) -> np.ndarray:
        total = np.zeros(len(self.feature_labels))
        for t in self.trees:
            total += t.gains
        s = total.sum()
        return total / s if s > 0 else total

    def predict(self, X) -> np.ndarray:
        X = _matrix(X, len(self.feature_labels))
        per_tree = [t.predict(X) for t in self.trees]
        n = len(per_tree)
        out = []
        # anchoring on the row minimum keeps the mean exact for identical trees
        # while staying independent of tree order
        for col in zip(*per_tree):
            lo = min(col)
            out.append(lo + math.fsum(v - lo for v in col) / n)
        return np.array(out)


def _matrix(X, m: int) -> np.ndarray:
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    if X.shape[1] != m:
        raise DimensionMismatch(f"expected {m} features, got {X.shape[1]}")
    return X


def _grow(X, y, idx, cfg: RFConfig, mtry: int, rng: np.random.Generator) -> Tree:
    m = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []
    gains = np.zeros(m)

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), idx, 0)]
    while stack:
        node, node_idx, depth = stack.pop()
        yn = y[node_idx]
        mean = float(yn.mean())
        value[node] = mean
        if depth >= cfg.max_depth or node_idx.shape[0] < 2 * cfg.min_leaf:
            continue
        yc = np.ascontiguousarray(yn - mean)
        if not np.any(yc):
            continue
        # features constant within the node do not count towards mtry
        feats = []
        for f in rng.permutation(m):
            col = X[node_idx, f]
            if col.min() < col.max():
                feats.append(f)
                if len(feats) == mtry:
                    break
        if not feats:
            continue
        feats = np.array(sorted(feats), dtype=np.int64)
        f, t, gain = kernels.best_split(X, yc, node_idx, feats, cfg.min_leaf)
        if f < 0 or gain <= 1e-12 * float(np.dot(yc, yc)):
            continue
        go_left = X[node_idx, f] <= t
        feature[node], threshold[node] = f, t
        gains[f] += gain
        l_node, r_node = new_node(), new_node()
        left[node], right[node] = l_node, r_node
        stack.append((r_node, node_idx[~go_left], depth + 1))
        stack.append((l_node, node_idx[go_left], depth + 1))

    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
        gains,
    )


def fit_random_forest(features, target, config: RFConfig | None = None, labels=None) -> RandomForestModel:
    """Bagged CART regression trees, ceil(K/3) candidate features per node.

    ``features`` may be a FeatureMatrix (its indicator columns are used and
    its target is the default ``target``) or a 2-D array.
    """
    cfg = config or RFConfig()
    if isinstance(features, FeatureMatrix):
        fm = features
        labels = fm.indicator_labels
        if target is None:
            target = fm.column(fm.target)
        X = fm.select(labels).values
    else:
        X = np.asarray(features, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        labels = labels or [f"x{i + 1}" for i in range(X.shape[1])]
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(target, dtype=np.float64)
    if X.shape[1] == 0:
        raise NoFeatures("random forest needs at least one feature")
    n = X.shape[0]
    if n < 10:
        raise TooFewRows(f"random forest needs at least 10 rows, got {n}")
    if y.shape[0] != n:
        raise DimensionMismatch(f"{n} feature rows but {y.shape[0]} targets")
    mtry = max(1, math.ceil(X.shape[1] / 3))
    trees = []
    for b in range(cfg.n_trees):
        rng = stream(cfg.seed, "rf", b)
        idx = np.sort(rng.integers(0, n, size=n)).astype(np.int64)
        trees.append(_grow(X, y, idx, cfg, mtry, rng))
    return RandomForestModel(tuple(trees), tuple(labels), cfg)


def predict_rf(model: RandomForestModel, row) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != len(model.feature_labels):
        raise DimensionMismatch(f"expected a row of {len(model.feature_labels)} features")
    return float(model.predict(row[None, :])[0])


def feature_importances(model: RandomForestModel) -> list[tuple[str, float]]:
    """(label, importance) pairs, descending; ties keep input order."""
    imp = model.importances
    order = sorted(range(len(imp)), key=lambda i: -imp[i])
    return [(model.feature_labels[i], float(imp[i])) for i in order]


def write_importance_csv(model: RandomForestModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "importance"])
        for lab, v in feature_importances(model):
            w.writerow([lab, repr(v)])
