"""Random forest of Gini trees grown on bootstrap weights."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .config import SchemaMismatchError, TrainConfig, check_binary


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, 2) bootstrap-weighted class counts
    oob: np.ndarray  # training rows (canonical order) left out of the bootstrap

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def vote(self) -> np.ndarray:
        return self.counts[:, 1] * 2 > self.counts.sum(axis=1)

    def apply(self, X) -> np.ndarray:
        return kernels.tree_apply(self.feature, self.threshold, self.left, self.right, X)


@dataclass
class RandomForestModel:
    trees: list[Tree]
    n_features: int
    mtry: int
    seed: int
    schema_hash: str = ""
    schema_version: str = ""
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    kind = "rf"


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row order that depends only on the multiset of (x, y) rows."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def grow_tree(X: np.ndarray, y: np.ndarray, rng: np.random.Generator, mtry: int, min_leaf: int) -> Tree:
    n, p = X.shape
    w = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.int64)
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        W = int(w[idx].sum())
        P = int((w[idx] * y[idx]).sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append((W - P, P))
        return len(feature) - 1

    root = np.flatnonzero(w)
    stack = [(new_node(root), root)]
    while stack:
        node, idx = stack.pop()
        neg, pos = counts[node]
        if neg == 0 or pos == 0 or neg + pos < 2 * min_leaf:
            continue
        order = rng.permutation(p).astype(np.int64)
        f, t, _, _ = kernels.best_split(X, y, w, idx, order, mtry, min_leaf)
        if f < 0:
            continue
        go_left = X[idx, f] <= t
        li, ri = idx[go_left], idx[~go_left]
        feature[node] = int(f)
        threshold[node] = float(t)
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(counts, dtype=np.int64).reshape(-1, 2), np.flatnonzero(w == 0))


def train_random_forest(X, y, config: TrainConfig | None = None, schema_hash: str = "",
                        schema_version: str = "") -> RandomForestModel:
    config = config or TrainConfig()
    X, y = check_binary(X, y)
    order = canonical_order(X, y)
    X, y = np.ascontiguousarray(X[order]), y[order]
    mtry = config.resolved_mtry(X.shape[1])

    def one(t):
        rng = np.random.default_rng([config.seed, t])
        return grow_tree(X, y, rng, mtry, config.min_leaf)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            trees = list(pool.map(one, range(config.n_trees)))
    else:
        trees = [one(t) for t in range(config.n_trees)]
    return RandomForestModel(trees, X.shape[1], mtry, config.seed, schema_hash, schema_version, config)


def rf_votes(model: RandomForestModel, X) -> np.ndarray:
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    if X.shape[1] != model.n_features:
        raise SchemaMismatchError(f"model expects {model.n_features} features, got {X.shape[1]}")
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in model.trees:
        votes += tree.vote[tree.apply(X)]
    return votes


def rf_score(model: RandomForestModel, X) -> np.ndarray:
    """Fraction of trees voting positive, per row."""
    return rf_votes(model, X) / model.n_trees
