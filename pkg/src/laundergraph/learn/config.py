from __future__ import annotations

import math
from dataclasses import asdict, dataclass


class TrainingError(ValueError):
    pass


class SchemaMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    """Learner settings. ``mtry=None`` means floor(sqrt(n_features))."""

    model: str = "rf"
    n_trees: int = 100
    mtry: int | None = None
    min_leaf: int = 1
    C: float = 1.0
    max_epochs: int = 2000
    tol: float = 1e-8
    seed: int = 0
    kernel: str = "linear"
    workers: int = 1

    def __post_init__(self):
        if self.model not in ("rf", "svm"):
            raise ValueError(f"unknown model kind {self.model!r}")
        if self.n_trees < 1 or self.min_leaf < 1 or self.max_epochs < 1 or self.workers < 1:
            raise ValueError("n_trees, min_leaf, max_epochs and workers must be positive")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be positive")
        if not self.C > 0 or not self.tol > 0:
            raise ValueError("C and tol must be positive")
        if self.kernel != "linear":
            raise NotImplementedError(f"kernel {self.kernel!r} is not implemented")

    def resolved_mtry(self, n_features: int) -> int:
        m = self.mtry if self.mtry is not None else int(math.floor(math.sqrt(n_features)))
        return max(1, min(m, n_features))

    def to_json(self) -> dict:
        return asdict(self)


def check_binary(X, y):
    import numpy as np

    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.int64).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise TrainingError("X must be 2-D with one row per label")
    if X.shape[0] < 2:
        raise TrainingError("need at least two rows")
    if not np.all((y == 0) | (y == 1)):
        raise TrainingError("labels must be 0/1")
    if y.min() == y.max():
        raise TrainingError("training labels contain a single class")
    if not np.all(np.isfinite(X)):
        raise TrainingError("non-finite feature values")
    return np.ascontiguousarray(X), y
