"""Binary snapshots of frozen graphs (magic ``LGRF``)."""

from __future__ import annotations

import json

import numpy as np

from ._container import ContainerError, decode_strings, encode_strings, read_container, write_container
from .graph import EVIDENCE_KINDS, EvidenceIndex, EvidenceKey, TransactionGraph

MAGIC = b"LGRF"
VERSION = 1


class SnapshotError(ContainerError):
    pass


def _strings(sections, name, values):
    off, dat = encode_strings(values)
    sections[name + ".off"] = off
    sections[name + ".dat"] = dat


def save_snapshot(graph: TransactionGraph, path, source_files=()) -> int:
    """Write ``graph`` to ``path``. Output bytes depend only on the graph and ``source_files``."""
    s: dict[str, np.ndarray] = {}
    _strings(s, "party.id", graph.party_ids)
    _strings(s, "party.country", [str(c) for c in graph.country])
    s["party.age"] = graph.age.astype("<f8")
    s["party.kind"] = graph.kind.astype(np.uint8)
    s["party.tagged"] = graph.tagged.astype(np.uint8)
    s["tx.src"] = graph.tx_src.astype("<i8")
    s["tx.dst"] = graph.tx_dst.astype("<i8")
    s["tx.amount"] = graph.tx_amount.astype("<f8")
    s["tx.currency"] = graph.tx_currency.astype("<i8")
    s["tx.timestamp"] = graph.tx_timestamp.astype("<i8")
    s["tx.channel"] = graph.tx_channel.astype(np.uint8)
    s["tx.report"] = graph.tx_report.astype("<i8")
    _strings(s, "currency", graph.currencies)
    _strings(s, "report", graph.report_ids)
    s["sup.a"] = graph.sup_a.astype("<i8")
    s["sup.b"] = graph.sup_b.astype("<i8")
    s["sup.weight"] = graph.sup_weight.astype("<f8")
    s["sup.evidence"] = graph.sup_evidence.astype("<i8")
    keys = graph.evidence_keys
    s["ev.kind"] = np.array([EVIDENCE_KINDS.index(k.kind) for k in keys], dtype=np.uint8)
    _strings(s, "ev.value", [k.value for k in keys])
    s["ev.d"] = np.array([graph.evidence.d(k) for k in keys], dtype="<i8")
    ap, ak, ac = [], [], []
    for kid, key in enumerate(keys):
        for pid, count in sorted(graph.evidence.parties(key).items(), key=lambda kv: graph.index_of(kv[0])):
            ap.append(graph.index_of(pid))
            ak.append(kid)
            ac.append(count)
    s["ev.assoc.party"] = np.array(ap, dtype="<i8")
    s["ev.assoc.key"] = np.array(ak, dtype="<i8")
    s["ev.assoc.count"] = np.array(ac, dtype="<i8")
    meta = {
        "counts": {
            "parties": graph.n_parties,
            "transaction_edges": graph.n_transaction_edges,
            "supplementary_edges": graph.n_supplementary_edges,
            "evidence_keys": len(keys),
            "reports": len(graph.report_ids),
        },
        "source_files": [str(f) for f in source_files],
    }
    s["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    return write_container(path, MAGIC, VERSION, s)


def read_snapshot_meta(path) -> dict:
    _, s = read_container(path, MAGIC, (VERSION,))
    return json.loads(s["meta"].tobytes().decode("utf-8"))


def load_snapshot(path) -> TransactionGraph:
    try:
        _, s = read_container(path, MAGIC, (VERSION,))
    except ContainerError as exc:
        raise SnapshotError(f"{path}: {exc}") from exc
    try:
        meta = json.loads(s["meta"].tobytes().decode("utf-8"))
        ids = decode_strings(s["party.id.off"], s["party.id.dat"])
        keys = [EvidenceKey(EVIDENCE_KINDS[k], v) for k, v in
                zip(s["ev.kind"].tolist(), decode_strings(s["ev.value.off"], s["ev.value.dat"]))]
    except KeyError as exc:
        raise SnapshotError(f"{path}: missing section {exc}") from exc
    index = EvidenceIndex()
    d = s["ev.d"].tolist()
    buckets: dict[int, dict[str, int]] = {i: {} for i in range(len(keys))}
    for p, k, c in zip(s["ev.assoc.party"].tolist(), s["ev.assoc.key"].tolist(), s["ev.assoc.count"].tolist()):
        buckets[k][ids[p]] = c
    for i, key in enumerate(keys):
        index.set_counts(key, d[i], buckets[i])
    graph = TransactionGraph(
        ids,
        decode_strings(s["party.country.off"], s["party.country.dat"]),
        s["party.age"], s["party.kind"], s["party.tagged"].astype(bool),
        s["tx.src"], s["tx.dst"], s["tx.amount"], s["tx.currency"],
        decode_strings(s["currency.off"], s["currency.dat"]),
        s["tx.timestamp"], s["tx.channel"], s["tx.report"],
        decode_strings(s["report.off"], s["report.dat"]),
        index, evidence_keys=keys,
    )
    counts = meta["counts"]
    observed = {
        "parties": graph.n_parties,
        "transaction_edges": graph.n_transaction_edges,
        "supplementary_edges": graph.n_supplementary_edges,
        "evidence_keys": len(keys),
        "reports": len(graph.report_ids),
    }
    if counts != observed:
        raise SnapshotError(f"{path}: table counts {observed} disagree with header {counts}")
    if not (np.array_equal(graph.sup_a, s["sup.a"]) and np.array_equal(graph.sup_b, s["sup.b"])
            and np.array_equal(graph.sup_weight, s["sup.weight"])
            and np.array_equal(graph.sup_evidence, s["sup.evidence"])):
        raise SnapshotError(f"{path}: supplementary table inconsistent with evidence index")
    return graph
