"""Report-file parsing and graph assembly.

Report files are JSON Lines. A line carrying ``report_id`` is a report, a line
carrying ``id`` is a party; anything else is malformed. Ingest is tolerant:
bad lines are collected with their line numbers and skipped.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .graph import (
    Channel,
    EvidenceKey,
    GraphBuilder,
    Party,
    PartyKind,
    TransactionGraph,
)

log = logging.getLogger(__name__)

PartyRecord = Party


@dataclass(frozen=True)
class ReportRecord:
    report_id: str
    channel: Channel
    senders: tuple[str, ...]
    receivers: tuple[str, ...]
    amount: float
    currency: str
    timestamp: int
    evidence_associations: tuple[tuple[str, EvidenceKey], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "channel", Channel(self.channel))
        object.__setattr__(self, "senders", tuple(self.senders))
        object.__setattr__(self, "receivers", tuple(self.receivers))
        object.__setattr__(self, "evidence_associations",
                           tuple((p, k if isinstance(k, EvidenceKey) else EvidenceKey(*k))
                                 for p, k in self.evidence_associations))
        if not self.senders or not self.receivers:
            raise ValueError("report needs at least one sender and one receiver")
        if not math.isfinite(self.amount) or self.amount < 0:
            raise ValueError(f"invalid amount {self.amount!r}")

    def to_json(self) -> dict:
        return {
            "report_id": self.report_id,
            "channel": self.channel.value,
            "senders": list(self.senders),
            "receivers": list(self.receivers),
            "amount": self.amount,
            "currency": self.currency,
            "timestamp": self.timestamp,
            "evidence_associations": [
                {"party_id": p, "kind": k.kind.value, "value": k.value}
                for p, k in self.evidence_associations
            ],
        }


def party_to_json(party: Party) -> dict:
    return {
        "id": party.id,
        "country": party.country,
        "age": party.age,
        "party_kind": party.party_kind.value,
        "tagged_suspicious": party.tagged_suspicious,
    }


@dataclass
class IngestErrors:
    lines: list[tuple[int, str]] = field(default_factory=list)
    total_lines: int = 0

    def __len__(self):
        return len(self.lines)

    def add(self, lineno: int, message: str):
        self.lines.append((lineno, message))


def parse_timestamp(value) -> int:
    """UTC seconds from an epoch number or an ISO-8601 string (naive means UTC)."""
    if isinstance(value, bool):
        raise ValueError("boolean timestamp")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError("non-finite timestamp")
        return int(math.floor(value))
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return int(math.floor(dt.timestamp()))
    raise ValueError(f"unparseable timestamp {value!r}")


def _party_from(obj: dict) -> Party:
    for name in ("id", "country"):
        if name not in obj:
            raise ValueError(f"missing field {name!r}")
    age = obj.get("age")
    return Party(
        id=str(obj["id"]),
        country=str(obj["country"]),
        age=None if age is None else float(age),
        party_kind=PartyKind(obj.get("party_kind", "individual")),
        tagged_suspicious=bool(obj.get("tagged_suspicious", False)),
    )


def _report_from(obj: dict) -> ReportRecord:
    for name in ("report_id", "channel", "senders", "receivers", "amount", "currency", "timestamp"):
        if name not in obj:
            raise ValueError(f"missing field {name!r}")
    amount = obj["amount"]
    if isinstance(amount, bool) or not isinstance(amount, (int, float)):
        raise ValueError("amount must be numeric")
    assoc = []
    for item in obj.get("evidence_associations", []) or []:
        if isinstance(item, dict):
            assoc.append((str(item["party_id"]), EvidenceKey(item["kind"], item["value"])))
        else:
            party, kind, value = item
            assoc.append((str(party), EvidenceKey(kind, value)))
    senders = obj["senders"]
    receivers = obj["receivers"]
    if not isinstance(senders, list) or not isinstance(receivers, list):
        raise ValueError("senders/receivers must be arrays")
    return ReportRecord(
        report_id=str(obj["report_id"]),
        channel=Channel(obj["channel"]),
        senders=tuple(str(s) for s in senders),
        receivers=tuple(str(r) for r in receivers),
        amount=float(amount),
        currency=str(obj["currency"]),
        timestamp=parse_timestamp(obj["timestamp"]),
        evidence_associations=tuple(assoc),
    )


def parse_reports(path) -> tuple[list[Party], list[ReportRecord], IngestErrors]:
    """Read a JSON Lines report file.

    Returns parties and reports in file order plus the error report. Blank
    lines are skipped and do not count as lines.
    """
    parties: list[Party] = []
    reports: list[ReportRecord] = []
    errors = IngestErrors()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            errors.total_lines += 1
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("record is not an object")
                if "report_id" in obj:
                    reports.append(_report_from(obj))
                elif "id" in obj:
                    parties.append(_party_from(obj))
                else:
                    raise ValueError("neither a report nor a party record")
            except (ValueError, KeyError, TypeError) as exc:
                errors.add(lineno, str(exc))
    if errors.lines:
        log.warning("%s: %d malformed line(s) skipped", path, len(errors.lines))
    return parties, reports, errors


def write_reports(path, parties: Iterable[Party], reports: Iterable[ReportRecord]):
    """Write parties then reports as JSON Lines (stable key order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in parties:
            fh.write(json.dumps(party_to_json(p)) + "\n")
        for r in reports:
            fh.write(json.dumps(r.to_json()) + "\n")


def build_graph(parties: Sequence[Party], reports: Sequence[ReportRecord]) -> TransactionGraph:
    """Assemble and freeze the graph; a dangling party reference is fatal."""
    builder = GraphBuilder(parties)
    for report in reports:
        builder.add_transaction(report)
    return builder.freeze()


def ingest(paths: Sequence[str | Path]) -> tuple[TransactionGraph, IngestErrors]:
    """Parse several report files (in the given order) and build one graph."""
    parties: list[Party] = []
    reports: list[ReportRecord] = []
    errors = IngestErrors()
    for path in paths:
        p, r, e = parse_reports(path)
        parties.extend(p)
        reports.extend(r)
        errors.total_lines += e.total_lines
        errors.lines.extend(e.lines)
    return build_graph(parties, reports), errors
