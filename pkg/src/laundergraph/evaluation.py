"""Labeling, balanced repeated holdout, ROC/AUC and threshold selection."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .community import Community, ExtractionParams, extract_batch
from .features import DEFAULT_SCHEMA, FeatureSchema, feature_matrix
from .graph import TransactionGraph
from .learn import TrainConfig, score, train


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class LabelingConfig:
    negative_sample: int = 20000
    seed: int = 0

    def __post_init__(self):
        if self.negative_sample < 1:
            raise ValueError("negative sample size must be >= 1")


@dataclass(frozen=True)
class EvalConfig:
    folds: int = 10
    train_fraction: float = 0.7
    betas: tuple[float, ...] = (0.1, 0.5, 1.0)
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.folds < 1:
            raise ValueError("folds must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train fraction must lie in (0, 1)")
        if not self.betas or any(b <= 0 for b in self.betas):
            raise ValueError("betas must be positive")


# --------------------------------------------------------------------------
# labels


def assign_labels(graph: TransactionGraph, tagged_parties: Sequence[str], config: LabelingConfig,
                  w_min: float = 0.01) -> tuple[list[str], list[str]]:
    """Positive subjects (tagged parties and their neighbours) and a negative sample.

    Neighbours count over transaction edges in either direction and over
    supplementary edges of weight at least ``w_min``.
    """
    positives: set[int] = set()
    for pid in tagged_parties:
        i = graph.index_of(pid)
        positives.add(i)
        positives.update(graph.transaction_neighbours(i).tolist())
        positives.update(graph.supplementary_neighbours(i, w_min).tolist())
    pool = np.setdiff1d(np.arange(graph.n_parties), np.fromiter(positives, dtype=np.int64, count=len(positives)))
    if config.negative_sample > pool.size:
        raise EvaluationError(f"negative sample of {config.negative_sample} exceeds the "
                              f"{pool.size} available non-positive parties")
    rng = np.random.default_rng(config.seed)
    neg = np.sort(rng.choice(pool, size=config.negative_sample, replace=False))
    ids = graph.party_ids
    return sorted(ids[i] for i in positives), [ids[i] for i in neg]


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    seeds: list[str]
    communities: list[Community] = field(default_factory=list, repr=False)
    schema_hash: str = DEFAULT_SCHEMA.hash

    @property
    def n_positive(self) -> int:
        return int(self.y.sum())

    @property
    def n_negative(self) -> int:
        return int(self.y.size - self.y.sum())


def build_dataset(graph: TransactionGraph, positives: Sequence[str], negatives: Sequence[str],
                  params: ExtractionParams | None = None, schema: FeatureSchema = DEFAULT_SCHEMA,
                  workers: int = 1, bin_width: int = 86400, c: float = 2.0) -> Dataset:
    """Extract, deduplicate and featurize labelled communities.

    Duplicates are removed within each class; a negative community whose
    member set equals a positive one is dropped.
    """
    pos = extract_batch(graph, positives, params, workers=workers)
    neg = extract_batch(graph, negatives, params, workers=workers)
    seen = {c.key for c in pos}
    neg = [c for c in neg if c.key not in seen]
    comms = pos + neg
    X = feature_matrix(comms, schema, bin_width, c)
    y = np.concatenate([np.ones(len(pos), dtype=np.int64), np.zeros(len(neg), dtype=np.int64)])
    return Dataset(X, y, [c.seed_id for c in comms], comms, schema.hash)


# --------------------------------------------------------------------------
# metrics


def f_beta(precision: float, recall: float, beta: float) -> float:
    if precision == 0 and recall == 0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * precision * recall / (b2 * precision + recall)


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).astype(np.int64).ravel()
    if s.size != y.size:
        raise EvaluationError("scores and labels differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise EvaluationError("labels must be 0/1")
    if y.size == 0 or y.min() == y.max():
        raise EvaluationError("both classes must be present")
    if not np.all(np.isfinite(s)):
        raise EvaluationError("non-finite scores")
    return s, y


def _cutpoint_counts(s, y):
    """Distinct scores descending with cumulative (tp, fp) when classifying ``score >= cut``."""
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[s[1:] != s[:-1], True]
    tp = np.cumsum(y)[last]
    fp = np.cumsum(1 - y)[last]
    return s[last], tp, fp


def roc_auc(scores, labels):
    """``((fpr, tpr), auc)``; the curve starts at the +inf cutpoint (0, 0)."""
    s, y = _check(scores, labels)
    _, tp, fp = _cutpoint_counts(s, y)
    P, N = y.sum(), y.size - y.sum()
    tpr = np.r_[0.0, tp / P]
    fpr = np.r_[0.0, fp / N]
    return (fpr, tpr), float(np.trapezoid(tpr, fpr))


def select_tau(scores, labels, beta: float) -> tuple[float, float, float, float]:
    """Cutpoint maximizing F_beta (ties toward the larger cutpoint).

    Returns ``(tau, F, precision, recall)``. Candidate cutpoints are the
    distinct observed scores; comparison is done in exact arithmetic.
    """
    s, y = _check(scores, labels)
    cuts, tp, fp = _cutpoint_counts(s, y)
    P = int(y.sum())
    b2 = Fraction(beta) ** 2
    best = None
    for i in range(cuts.size):  # descending cutpoints: strict > keeps the larger on ties
        t, f = int(tp[i]), int(fp[i])
        F = (1 + b2) * t / ((1 + b2) * t + b2 * (P - t) + f) if t else Fraction(0)
        if best is None or F > best[1]:
            best = (i, F)
    i = best[0]
    t, f = int(tp[i]), int(fp[i])
    precision = t / (t + f) if t + f else 0.0
    recall = t / P
    return float(cuts[i]), float(best[1]), precision, recall


# --------------------------------------------------------------------------
# repeated holdout


@dataclass
class ThresholdReport:
    auc: float
    per_beta: dict[float, dict[str, float]]
    roc: tuple[list[float], list[float]] | None = None

    def to_json(self) -> dict:
        return {"auc": self.auc,
                "per_beta": {str(b): v for b, v in self.per_beta.items()},
                "roc": None if self.roc is None else {"fpr": self.roc[0], "tpr": self.roc[1]}}


def threshold_report(scores, labels, betas: Sequence[float]) -> ThresholdReport:
    (fpr, tpr), auc = roc_auc(scores, labels)
    per = {}
    for b in betas:
        tau, F, p, r = select_tau(scores, labels, b)
        per[float(b)] = {"tau": tau, "f_score": F, "precision": p, "recall": r}
    return ThresholdReport(auc, per, (fpr.tolist(), tpr.tolist()))


@dataclass
class EvalSummary:
    mean: dict[str, ThresholdReport]
    folds: dict[str, list[ThresholdReport]]
    n_folds: int

    def table(self) -> list[dict]:
        rows = []
        for name, rep in self.mean.items():
            for b, v in rep.per_beta.items():
                rows.append({"model": name, "auc": rep.auc, "beta": b, "tau": v["tau"],
                             "f_score": v["f_score"], "recall": v["recall"], "precision": v["precision"]})
        return rows

    def to_json(self) -> dict:
        return {"n_folds": self.n_folds, "table": self.table(),
                "folds": {m: [r.to_json() for r in reps] for m, reps in self.folds.items()}}

    def format(self) -> str:
        lines = [f"{'model':<8} {'AUC':>6} {'beta':>5} {'tau':>8} {'F':>6} {'recall':>7} {'prec':>6}"]
        for r in self.table():
            lines.append(f"{r['model']:<8} {r['auc']:6.3f} {r['beta']:5.2f} {r['tau']:8.3f} "
                         f"{r['f_score']:6.3f} {r['recall']:7.3f} {r['precision']:6.3f}")
        return "\n".join(lines)


def stratified_split(y: np.ndarray, fraction: float, rng: np.random.Generator):
    train, test = [], []
    for cls in (0, 1):
        idx = rng.permutation(np.flatnonzero(y == cls))
        cut = int(round(fraction * idx.size))
        train.append(idx[:cut])
        test.append(idx[cut:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def _mean_report(reports: list[ThresholdReport]) -> ThresholdReport:
    betas = reports[0].per_beta.keys()
    per = {b: {key: float(np.mean([r.per_beta[b][key] for r in reports]))
               for key in ("tau", "f_score", "precision", "recall")} for b in betas}
    return ThresholdReport(float(np.mean([r.auc for r in reports])), per)


def repeated_holdout(dataset: Dataset, models: Mapping[str, TrainConfig],
                     config: EvalConfig | None = None) -> EvalSummary:
    """Balanced resampling: every positive plus as many random negatives, split per fold."""
    config = config or EvalConfig()
    pos = np.flatnonzero(dataset.y == 1)
    neg = np.flatnonzero(dataset.y == 0)
    if pos.size < 2 or neg.size < 2:
        raise EvaluationError("need at least two communities per class")
    if neg.size < pos.size:
        raise EvaluationError(f"{neg.size} negatives cannot balance {pos.size} positives")

    def fold(i):
        rng = np.random.default_rng([config.seed, i])
        rows = np.sort(np.concatenate([pos, rng.choice(neg, size=pos.size, replace=False)]))
        y = dataset.y[rows]
        tr, te = stratified_split(y, config.train_fraction, rng)
        out = {}
        for name, cfg in models.items():
            model = train(dataset.X[rows[tr]], y[tr], cfg, dataset.schema_hash)
            out[name] = threshold_report(score(model, dataset.X[rows[te]]), y[te], config.betas)
        return out

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(fold, range(config.folds)))
    else:
        results = [fold(i) for i in range(config.folds)]
    folds = {name: [r[name] for r in results] for name in models}
    return EvalSummary({name: _mean_report(reps) for name, reps in folds.items()}, folds, config.folds)


def write_eval_report(summary: EvalSummary, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary.to_json(), fh, indent=2)
