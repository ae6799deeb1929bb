from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_features(self) -> int:
        return int(self.mean.size)


def standardize_fit(X) -> Standardizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("cannot standardize an empty matrix")
    return Standardizer(X.mean(axis=0), X.std(axis=0))


def standardize_apply(std: Standardizer, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != std.n_features:
        raise ValueError(f"expected {std.n_features} columns, got {X.shape[-1]}")
    scale = np.where(std.std > 0, std.std, 1.0)
    out = (X - std.mean) / scale
    out[..., std.std == 0] = 0.0
    return out
