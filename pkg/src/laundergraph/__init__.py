"""Transaction-network community extraction and suspicious-community scoring."""

__version__ = "0.1.0"

from .community import (  # noqa: E402
    Community,
    ExtractionParams,
    deduplicate,
    diameter,
    extract,
    extract_batch,
    merge_overlapping,
)
from .graph import (  # noqa: E402
    EvidenceIndex,
    EvidenceKey,
    GraphBuilder,
    Party,
    TransactionGraph,
    connected_components,
    evidence_weight,
    pair_supplementary_weight,
)
from .ingest import ReportRecord, build_graph, parse_reports  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "BACKEND", "Community", "EvidenceIndex", "EvidenceKey", "ExtractionParams", "GraphBuilder", "Party",
    "ReportRecord", "TransactionGraph", "build_graph", "connected_components", "deduplicate", "diameter",
    "evidence_weight", "extract", "extract_batch", "merge_overlapping", "pair_supplementary_weight",
    "parse_reports",
]
