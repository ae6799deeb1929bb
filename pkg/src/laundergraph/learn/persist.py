"""Model files (magic ``LGMD``) sharing the snapshot container format."""

from __future__ import annotations

import json

import numpy as np

from .._container import ContainerError, read_container, write_container
from .config import SchemaMismatchError, TrainConfig
from .forest import RandomForestModel, Tree
from .standardize import Standardizer
from .svm import LinearSVMModel

MAGIC = b"LGMD"
VERSION = 1


class ModelFileError(ContainerError):
    pass


def _meta(model) -> dict:
    return {"kind": model.kind, "schema_hash": model.schema_hash,
            "schema_version": model.schema_version, "n_features": model.n_features,
            "config": model.config.to_json()}


def save_model(model, path) -> int:
    s: dict[str, np.ndarray] = {}
    meta = _meta(model)
    if isinstance(model, RandomForestModel):
        meta.update(mtry=model.mtry, seed=model.seed)
        sizes = np.array([t.n_nodes for t in model.trees], dtype="<i8")
        oob = np.array([t.oob.size for t in model.trees], dtype="<i8")
        s["tree.size"] = sizes
        s["tree.feature"] = np.concatenate([t.feature for t in model.trees]).astype("<i8")
        s["tree.threshold"] = np.concatenate([t.threshold for t in model.trees]).astype("<f8")
        s["tree.left"] = np.concatenate([t.left for t in model.trees]).astype("<i8")
        s["tree.right"] = np.concatenate([t.right for t in model.trees]).astype("<i8")
        s["tree.counts"] = np.concatenate([t.counts.ravel() for t in model.trees]).astype("<i8")
        s["tree.oob.size"] = oob
        s["tree.oob"] = np.concatenate([t.oob for t in model.trees]).astype("<i8")
    elif isinstance(model, LinearSVMModel):
        meta.update(C=model.C)
        s["svm.w"] = model.w.astype("<f8")
        s["svm.b"] = np.array([model.b], dtype="<f8")
        s["svm.mean"] = model.standardizer.mean.astype("<f8")
        s["svm.std"] = model.standardizer.std.astype("<f8")
        s["svm.history"] = np.asarray(model.objective_history, dtype="<f8")
    else:
        raise TypeError(f"cannot save {type(model).__name__}")
    s["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    return write_container(path, MAGIC, VERSION, s)


def _split(arr, sizes):
    return np.split(np.asarray(arr), np.cumsum(sizes)[:-1]) if len(sizes) else []


def load_model(path, schema_hash: str | None = None):
    """Load a model; refuses files whose schema hash differs from ``schema_hash``."""
    try:
        _, s = read_container(path, MAGIC, (VERSION,))
    except ContainerError as exc:
        raise ModelFileError(f"{path}: {exc}") from exc
    meta = json.loads(s["meta"].tobytes().decode("utf-8"))
    if schema_hash is not None and meta["schema_hash"] != schema_hash:
        raise SchemaMismatchError(f"{path}: model schema {meta['schema_hash']} != {schema_hash}")
    config = TrainConfig(**meta["config"])
    if meta["kind"] == "rf":
        sizes = s["tree.size"].tolist()
        parts = [_split(s[name], sizes) for name in ("tree.feature", "tree.threshold", "tree.left", "tree.right")]
        counts = _split(s["tree.counts"].reshape(-1, 2), sizes)
        oob = _split(s["tree.oob"], s["tree.oob.size"].tolist())
        trees = [Tree(*(np.array(p[i]) for p in parts), np.array(counts[i]), np.array(oob[i]))
                 for i in range(len(sizes))]
        return RandomForestModel(trees, meta["n_features"], meta["mtry"], meta["seed"],
                                 meta["schema_hash"], meta["schema_version"], config)
    if meta["kind"] == "svm":
        std = Standardizer(np.array(s["svm.mean"]), np.array(s["svm.std"]))
        return LinearSVMModel(np.array(s["svm.w"]), float(s["svm.b"][0]), meta["C"], std,
                              meta["schema_hash"], meta["schema_version"],
                              s["svm.history"].tolist(), config)
    raise ModelFileError(f"{path}: unknown model kind {meta['kind']!r}")
