"""Linear soft-margin SVM trained by dual coordinate descent.

The objective is ``0.5 * |w|^2 + C * mean(hinge)``, with the bias folded into
``w`` through a constant feature. Each sample's dual variable is boxed by
``C / n``, so duplicating every row leaves the optimum unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from .config import SchemaMismatchError, TrainConfig, TrainingError, check_binary
from .standardize import Standardizer, standardize_apply, standardize_fit


class ConvergenceError(TrainingError):
    pass


@dataclass
class LinearSVMModel:
    w: np.ndarray
    b: float
    C: float
    standardizer: Standardizer
    schema_hash: str = ""
    schema_version: str = ""
    objective_history: list[float] = field(default_factory=list)
    config: TrainConfig = field(default_factory=TrainConfig)

    kind = "svm"

    @property
    def n_features(self) -> int:
        return int(self.w.size)


def _primal(Z, ys, w, upper):
    margin = 1.0 - ys * (Z @ w)
    return 0.5 * float(w @ w) + upper * float(np.maximum(margin, 0.0).sum())


def train_linear_svm(X, y, config: TrainConfig | None = None, schema_hash: str = "",
                     schema_version: str = "") -> LinearSVMModel:
    config = config or TrainConfig(model="svm")
    X, y = check_binary(X, y)
    std = standardize_fit(X)
    Z = np.ascontiguousarray(np.hstack([standardize_apply(std, X), np.ones((X.shape[0], 1))]))
    ys = np.where(y == 1, 1.0, -1.0)
    n = Z.shape[0]
    upper = config.C / n
    qii = np.einsum("ij,ij->i", Z, Z)
    alpha = np.zeros(n)
    w = np.zeros(Z.shape[1])
    rng = np.random.default_rng(config.seed)
    history = [0.0]
    for _ in range(config.max_epochs):
        kernels.svm_cd_epoch(Z, ys, alpha, w, qii, upper, rng.permutation(n).astype(np.int64))
        dual = 0.5 * float(w @ w) - float(alpha.sum())
        history.append(dual)
        primal = _primal(Z, ys, w, upper)
        if primal + dual <= config.tol * max(1.0, abs(primal)):
            break
    else:
        delta = history[-2] - history[-1]
        raise ConvergenceError(f"no convergence after {config.max_epochs} epochs; "
                               f"final objective delta {delta:.3e}")
    return LinearSVMModel(w[:-1].copy(), float(w[-1]), config.C, std, schema_hash, schema_version,
                          history, config)


def svm_score(model: LinearSVMModel, X) -> np.ndarray:
    """Signed decision value per row."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.n_features:
        raise SchemaMismatchError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return standardize_apply(model.standardizer, X) @ model.w + model.b
