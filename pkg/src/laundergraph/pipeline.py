"""Pipeline configuration and the streaming monitor."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterable, Iterator

import numpy as np

from .community import Community, ExtractionError, ExtractionParams, extract, merge_overlapping
from .evaluation import EvalConfig, LabelingConfig
from .features import DEFAULT_SCHEMA, FeatureSchema, featurize
from .graph import GraphError, Party, TransactionGraph
from .learn import RandomForestModel, SchemaMismatchError, TrainConfig, score

log = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    # extraction
    k: int = 3
    n_max: int | list = 40
    w_min: float | list = 0.01
    theta: float = 0.5
    component_shortcut: bool = True
    # features
    bin_width: int = 86400
    c: float = 2.0
    # learning
    model: str = "rf"
    n_trees: int = 100
    mtry: int | None = None
    min_leaf: int = 1
    C: float = 1.0
    max_epochs: int = 2000
    seed: int = 0
    # evaluation and operation
    tau: float = 0.5
    beta: float = 0.1
    negative_sample: int = 20000
    folds: int = 10
    train_fraction: float = 0.7
    betas: list = field(default_factory=lambda: [0.1, 0.5, 1.0])
    window_size: int = 1000
    window_seconds: int = 86400
    workers: int = 1
    # paths
    reports: list = field(default_factory=list)
    snapshot: str | None = None
    model_path: str | None = None
    ground_truth: str | None = None
    out: str | None = None

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must lie in (0, 1]")
        if self.model == "rf" and not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1] for random forest models")
        if self.window_size < 1 or self.window_seconds < 1 or self.workers < 1:
            raise ValueError("window and worker settings must be positive")
        self.extraction_params()
        self.train_config()

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data, **overrides)

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)

    def extraction_params(self) -> ExtractionParams:
        return ExtractionParams(self.k, self.n_max, self.w_min, self.component_shortcut)

    def train_config(self, model: str | None = None) -> TrainConfig:
        return TrainConfig(model=model or self.model, n_trees=self.n_trees, mtry=self.mtry,
                           min_leaf=self.min_leaf, C=self.C, max_epochs=self.max_epochs,
                           seed=self.seed, workers=self.workers)

    def labeling_config(self) -> LabelingConfig:
        return LabelingConfig(self.negative_sample, self.seed)

    def eval_config(self) -> EvalConfig:
        return EvalConfig(self.folds, self.train_fraction, tuple(self.betas), self.seed, self.workers)


@dataclass
class Alert:
    community: Community
    score: float
    tau: float
    model_id: str
    lineage: tuple[str, ...]
    timestamp: int
    reports: tuple[str, ...] = ()

    def __post_init__(self):
        if self.score < self.tau:
            raise ValueError("alert score below threshold")
        if not self.lineage:
            raise ValueError("alert lineage must be non-empty")

    def to_json(self) -> dict:
        return {"seed": self.community.seed_id, "members": self.community.member_ids,
                "score": self.score, "tau": self.tau, "model_id": self.model_id,
                "lineage": list(self.lineage), "timestamp": self.timestamp,
                "reports": list(self.reports)}


@dataclass
class _Pending:
    community: Community
    score: float
    report_id: str
    timestamp: int


@dataclass
class MonitorStats:
    processed: int = 0
    suspicious: int = 0
    alerts: int = 0
    skipped: list = field(default_factory=list)  # (report_id, reason)


class Monitor:
    """Scores each incoming report's sender community and emits merged alerts.

    Suspicious communities are held until the window reaches ``window_size``
    entries or ``window_seconds`` of report time has passed since the first
    held one; the window is then merged (Jaccard ``>= theta``) and emitted.
    """

    def __init__(self, graph: TransactionGraph, model, tau: float, params: ExtractionParams | None = None,
                 theta: float = 0.5, window_size: int = 1000, window_seconds: int = 86400,
                 schema: FeatureSchema = DEFAULT_SCHEMA, bin_width: int = 86400, c: float = 2.0,
                 model_id: str = "model"):
        if model.schema_hash and model.schema_hash != schema.hash:
            raise SchemaMismatchError(f"model schema {model.schema_hash} != feature schema {schema.hash}")
        if isinstance(model, RandomForestModel) and not 0.0 <= tau <= 1.0:
            raise ValueError("tau must lie in [0, 1] for random forest models")
        self.graph = graph
        self.model = model
        self.tau = float(tau)
        self.params = params or ExtractionParams()
        self.theta = theta
        self.window_size = window_size
        self.window_seconds = window_seconds
        self.schema = schema
        self.bin_width = bin_width
        self.c = c
        self.model_id = model_id
        self.pending: list[_Pending] = []
        self.window_start: int | None = None
        self.stats = MonitorStats()

    def add_parties(self, parties: Iterable[Party]):
        parties = [p for p in parties if p.id not in self.graph]
        if parties:
            self.graph = self.graph.extended(parties=parties)

    def _due(self, timestamp: int) -> bool:
        return bool(self.pending) and (len(self.pending) >= self.window_size
                                       or timestamp - self.window_start >= self.window_seconds)

    def process(self, report) -> list[Alert]:
        """Ingest one report; returns alerts flushed by it (often none)."""
        out = []
        if self._due(report.timestamp):
            out = self.flush()
        self.stats.processed += 1
        try:
            self.graph = self.graph.extended(reports=[report])
            community = extract(self.graph, report.senders[0], self.params)
            value = float(score(self.model, featurize(community, self.schema, self.bin_width, self.c).values)[0])
        except (GraphError, ExtractionError, ValueError) as exc:
            if isinstance(exc, SchemaMismatchError):
                raise
            log.warning("report %s skipped: %s", report.report_id, exc)
            self.stats.skipped.append((report.report_id, str(exc)))
            return out
        if value >= self.tau:
            self.stats.suspicious += 1
            if not self.pending:
                self.window_start = report.timestamp
            self.pending.append(_Pending(community, value, report.report_id, report.timestamp))
            if len(self.pending) >= self.window_size:
                out.extend(self.flush())
        return out

    def flush(self) -> list[Alert]:
        if not self.pending:
            return []
        g = self.graph
        # rebind to the newest view so unions see every appended party
        comms = [Community(g, p.community.seed, p.community.members, p.community.params,
                           masks=p.community.masks, component=p.community.component,
                           shortcut=p.community.shortcut) for p in self.pending]
        merged = merge_overlapping(comms, self.theta)
        alerts = []
        for m in merged:
            parts = [p for p in self.pending if p.community.seed_id in m.lineage]
            alerts.append(Alert(m, max(p.score for p in parts), self.tau, self.model_id, m.lineage,
                                max(p.timestamp for p in parts), tuple(sorted({p.report_id for p in parts}))))
        self.pending = []
        self.window_start = None
        self.stats.alerts += len(alerts)
        return alerts


def monitor(graph: TransactionGraph, model, tau: float, stream: Iterable, window_size: int = 1000,
            window_seconds: int = 86400, theta: float = 0.5, params: ExtractionParams | None = None,
            stats: MonitorStats | None = None, **kwargs) -> Iterator[Alert]:
    """Generator over alerts for a report stream; flushes the final window at the end."""
    mon = Monitor(graph, model, tau, params, theta, window_size, window_seconds, **kwargs)
    if stats is not None:
        mon.stats = stats
    for report in stream:
        yield from mon.process(report)
    yield from mon.flush()
