"""Classifiers over community feature vectors."""

from .config import SchemaMismatchError, TrainConfig, TrainingError
from .forest import RandomForestModel, Tree, rf_score, rf_votes, train_random_forest
from .persist import ModelFileError, load_model, save_model
from .standardize import Standardizer, standardize_apply, standardize_fit
from .svm import ConvergenceError, LinearSVMModel, svm_score, train_linear_svm


def train(X, y, config: TrainConfig, schema_hash: str = "", schema_version: str = ""):
    if config.model == "rf":
        return train_random_forest(X, y, config, schema_hash, schema_version)
    return train_linear_svm(X, y, config, schema_hash, schema_version)


def score(model, X):
    if isinstance(model, RandomForestModel):
        return rf_score(model, X)
    return svm_score(model, X)


__all__ = [
    "ConvergenceError", "LinearSVMModel", "ModelFileError", "RandomForestModel", "SchemaMismatchError",
    "Standardizer", "TrainConfig", "TrainingError", "Tree", "load_model", "rf_score", "rf_votes",
    "save_model", "score", "standardize_apply", "standardize_fit", "svm_score", "train",
    "train_linear_svm", "train_random_forest",
]
