"""Typed attributed transaction multigraph.

Parties are vertices. Two edge families connect them: transaction edges (one
per sender/receiver pair of every report, multi-edges and self-loops kept) and
supplementary edges (one weighted undirected edge per pair of parties that
share evidence such as an account).

Graphs are assembled with :class:`GraphBuilder` and frozen into an immutable
:class:`TransactionGraph` that holds flat numpy tables plus CSR adjacency.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import kernels

if TYPE_CHECKING:  # pragma: no cover
    from .ingest import ReportRecord


class GraphError(ValueError):
    """Invalid graph input or query."""


class FrozenGraphError(RuntimeError):
    pass


class PartyKind(str, enum.Enum):
    INDIVIDUAL = "individual"
    BUSINESS = "business"


class Channel(str, enum.Enum):
    CASH_DEPOSIT = "cash_deposit"
    INTERNATIONAL_TRANSFER = "international_transfer"


class EvidenceKind(str, enum.Enum):
    SHARED_ACCOUNT = "shared_account"
    SHARED_AGENT = "shared_agent"
    SHARED_GEOLOCATION = "shared_geolocation"
    OTHER = "other"

    @classmethod
    def parse(cls, value) -> "EvidenceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            return cls.OTHER


PARTY_KINDS = (PartyKind.INDIVIDUAL, PartyKind.BUSINESS)
CHANNELS = (Channel.CASH_DEPOSIT, Channel.INTERNATIONAL_TRANSFER)
EVIDENCE_KINDS = tuple(EvidenceKind)


@dataclass(frozen=True)
class Party:
    id: str
    country: str
    age: float | None = None
    party_kind: PartyKind = PartyKind.INDIVIDUAL
    tagged_suspicious: bool = False

    def __post_init__(self):
        object.__setattr__(self, "party_kind", PartyKind(self.party_kind))
        if self.age is not None:
            age = float(self.age)
            if not (0.0 <= age <= 130.0):
                raise GraphError(f"party {self.id!r}: age {self.age} outside [0, 130]")
            object.__setattr__(self, "age", age)


@dataclass(frozen=True)
class TransactionEdge:
    src: str
    dst: str
    amount: float
    currency: str
    timestamp: int
    channel: Channel
    report_id: str


@dataclass(frozen=True, order=True)
class EvidenceKey:
    kind: EvidenceKind
    value: str

    def __post_init__(self):
        object.__setattr__(self, "kind", EvidenceKind.parse(self.kind))
        object.__setattr__(self, "value", str(self.value))


@dataclass(frozen=True)
class SupplementaryEdge:
    a: str
    b: str
    weight: float
    best_evidence: EvidenceKey


# --------------------------------------------------------------------------
# evidence weights


def evidence_weight(n_p: int, n_q: int, d_e: int) -> float:
    """Strength of the p-q link through one piece of evidence.

    ``(n_p / d_e) * (n_q / (d_e - n_p))`` clamped to [0, 1]; the second factor
    is 1 when ``d_e == n_p``.
    """
    if d_e <= 0:
        raise GraphError("evidence with no transactions (d_e = 0)")
    if not (0 <= n_p <= d_e and 0 <= n_q <= d_e):
        raise GraphError(f"counts out of range: n_p={n_p}, n_q={n_q}, d_e={d_e}")
    first = n_p / d_e
    rest = d_e - n_p
    second = 1.0 if rest == 0 else n_q / rest
    return min(max(first * second, 0.0), 1.0)


def evidence_weight_array(n_p, n_q, d_e) -> np.ndarray:
    """Vectorised :func:`evidence_weight` (inputs assumed valid)."""
    n_p = np.asarray(n_p, dtype=np.float64)
    n_q = np.asarray(n_q, dtype=np.float64)
    d_e = np.asarray(d_e, dtype=np.float64)
    if np.any(d_e <= 0):
        raise GraphError("evidence with no transactions (d_e = 0)")
    rest = d_e - n_p
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(rest == 0, 1.0, n_q / np.where(rest == 0, 1.0, rest))
    return np.clip((n_p / d_e) * second, 0.0, 1.0)


class EvidenceIndex:
    """Per-evidence transaction tallies.

    ``d(e)`` counts transactions involving evidence ``e``; ``n(p, e)`` counts the
    transactions in which party ``p`` is associated with ``e``.
    """

    def __init__(self):
        self._d: dict[EvidenceKey, int] = {}
        self._n: dict[EvidenceKey, dict[str, int]] = {}
        self.frozen = False

    def record(self, associations: Iterable[tuple[str, EvidenceKey]]) -> set[EvidenceKey]:
        """Register the evidence associations of one transaction.

        Repeated (party, key) pairs within a transaction count once. Returns
        the keys touched.
        """
        if self.frozen:
            raise FrozenGraphError("evidence index is frozen")
        per_key: dict[EvidenceKey, set[str]] = {}
        for party, key in associations:
            if not isinstance(key, EvidenceKey):
                key = EvidenceKey(*key)
            per_key.setdefault(key, set()).add(party)
        for key, parties in per_key.items():
            self._d[key] = self._d.get(key, 0) + 1
            bucket = self._n.setdefault(key, {})
            for party in parties:
                bucket[party] = bucket.get(party, 0) + 1
        return set(per_key)

    def set_counts(self, key: EvidenceKey, d_e: int, counts: dict[str, int]):
        """Install tallies for ``key`` directly (used when loading snapshots)."""
        if any(c > d_e or c < 0 for c in counts.values()):
            raise GraphError(f"inconsistent counts for {key}")
        self._d[key] = int(d_e)
        self._n[key] = {p: int(c) for p, c in counts.items()}

    def d(self, key: EvidenceKey) -> int:
        return self._d.get(key, 0)

    def n(self, party: str, key: EvidenceKey) -> int:
        return self._n.get(key, {}).get(party, 0)

    def parties(self, key: EvidenceKey) -> dict[str, int]:
        return dict(self._n.get(key, {}))

    def keys(self) -> list[EvidenceKey]:
        return sorted(self._d)

    def evidence_of(self, party: str) -> list[EvidenceKey]:
        return sorted(k for k, bucket in self._n.items() if party in bucket)

    def copy(self) -> "EvidenceIndex":
        out = EvidenceIndex()
        out._d = dict(self._d)
        out._n = {k: dict(v) for k, v in self._n.items()}
        return out

    def __len__(self):
        return len(self._d)

    def __eq__(self, other):
        return isinstance(other, EvidenceIndex) and self._d == other._d and self._n == other._n


def pair_supplementary_weight(p: str, q: str, index: EvidenceIndex) -> float:
    """Maximum over shared evidence of the symmetrised per-evidence weight."""
    if p == q:
        raise GraphError("supplementary weight needs two distinct parties")
    best = 0.0
    for key in index.evidence_of(p):
        n_q = index.n(q, key)
        if n_q == 0:
            continue
        n_p = index.n(p, key)
        d_e = index.d(key)
        best = max(best, evidence_weight(n_p, n_q, d_e), evidence_weight(n_q, n_p, d_e))
    return best


@dataclass
class PairTable:
    """Per-(pair, evidence) weights; ``a < b`` index order, one row per shared key."""

    a: np.ndarray
    b: np.ndarray
    evidence: np.ndarray
    weight: np.ndarray

    @classmethod
    def empty(cls):
        z = np.empty(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy(), np.empty(0, dtype=np.float64))

    def concat(self, other: "PairTable") -> "PairTable":
        return PairTable(*(np.concatenate([x, y]) for x, y in
                           zip((self.a, self.b, self.evidence, self.weight),
                               (other.a, other.b, other.evidence, other.weight))))

    def without(self, evidence_ids) -> "PairTable":
        keep = ~np.isin(self.evidence, np.asarray(list(evidence_ids), dtype=np.int64))
        return PairTable(self.a[keep], self.b[keep], self.evidence[keep], self.weight[keep])


_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(m: int):
    if m not in _TRIU_CACHE:
        _TRIU_CACHE[m] = np.triu_indices(m, 1)
    return _TRIU_CACHE[m]


def pair_table(index: EvidenceIndex, keys: Sequence[EvidenceKey], key_ids: Sequence[int],
               party_index: dict[str, int]) -> PairTable:
    """Clique pairs and symmetrised weights for the given evidence keys."""
    parts_a, parts_b, parts_e, parts_w = [], [], [], []
    for key, eid in zip(keys, key_ids):
        bucket = index._n.get(key, {})
        if len(bucket) < 2:
            continue
        d_e = index.d(key)
        ids = np.array([party_index[p] for p in bucket], dtype=np.int64)
        cnt = np.array(list(bucket.values()), dtype=np.int64)
        order = np.argsort(ids)
        ids, cnt = ids[order], cnt[order]
        i, j = _triu(len(ids))
        w = np.maximum(evidence_weight_array(cnt[i], cnt[j], d_e),
                       evidence_weight_array(cnt[j], cnt[i], d_e))
        parts_a.append(ids[i])
        parts_b.append(ids[j])
        parts_e.append(np.full(len(i), eid, dtype=np.int64))
        parts_w.append(w)
    if not parts_a:
        return PairTable.empty()
    return PairTable(np.concatenate(parts_a), np.concatenate(parts_b),
                     np.concatenate(parts_e), np.concatenate(parts_w))


def reduce_pairs(table: PairTable):
    """Collapse per-evidence rows to one edge per pair: (a, b, weight, best evidence id).

    Ties on weight go to the smallest evidence id.
    """
    if table.a.size == 0:
        z = np.empty(0, dtype=np.int64)
        return z, z.copy(), np.empty(0, dtype=np.float64), z.copy()
    order = np.lexsort((table.evidence, -table.weight, table.b, table.a))
    a, b = table.a[order], table.b[order]
    first = np.ones(a.size, dtype=bool)
    first[1:] = (a[1:] != a[:-1]) | (b[1:] != b[:-1])
    sel = order[first]
    return table.a[sel], table.b[sel], table.weight[sel], table.evidence[sel]


def build_supplementary_edges(index: EvidenceIndex) -> list[SupplementaryEdge]:
    """One supplementary edge per pair of parties sharing any evidence."""
    keys = index.keys()
    parties = sorted({p for k in keys for p in index._n.get(k, {})})
    pidx = {p: i for i, p in enumerate(parties)}
    a, b, w, e = reduce_pairs(pair_table(index, keys, range(len(keys)), pidx))
    return [SupplementaryEdge(parties[i], parties[j], float(x), keys[k])
            for i, j, x, k in zip(a.tolist(), b.tolist(), w.tolist(), e.tolist())]


# --------------------------------------------------------------------------
# graph


class GraphBuilder:
    """Single-writer accumulator; :meth:`freeze` yields the immutable graph."""

    def __init__(self, parties: Iterable[Party] = ()):
        self.parties: list[Party] = []
        self._index: dict[str, int] = {}
        self.src: list[int] = []
        self.dst: list[int] = []
        self.amount: list[float] = []
        self.currency: list[str] = []
        self.timestamp: list[int] = []
        self.channel: list[int] = []
        self.report: list[str] = []
        self.evidence = EvidenceIndex()
        self._frozen = False
        for p in parties:
            self.add_party(p)

    def _check(self):
        if self._frozen:
            raise FrozenGraphError("graph already frozen")

    def add_party(self, party: Party) -> int:
        self._check()
        if party.id in self._index:
            raise GraphError(f"duplicate party id {party.id!r}")
        self._index[party.id] = len(self.parties)
        self.parties.append(party)
        return self._index[party.id]

    def add_transaction(self, report: "ReportRecord") -> list[TransactionEdge]:
        """Append one edge per (sender, receiver) pair of ``report``."""
        self._check()
        if not report.senders or not report.receivers:
            raise GraphError(f"report {report.report_id!r}: needs senders and receivers")
        if report.amount < 0:
            raise GraphError(f"report {report.report_id!r}: negative amount")
        for pid in list(report.senders) + list(report.receivers) + [p for p, _ in report.evidence_associations]:
            if pid not in self._index:
                raise GraphError(f"report {report.report_id!r}: unknown party {pid!r}")
        channel = Channel(report.channel)
        edges = []
        for s in report.senders:
            for r in report.receivers:
                self.src.append(self._index[s])
                self.dst.append(self._index[r])
                self.amount.append(float(report.amount))
                self.currency.append(report.currency)
                self.timestamp.append(int(report.timestamp))
                self.channel.append(CHANNELS.index(channel))
                self.report.append(report.report_id)
                edges.append(TransactionEdge(s, r, float(report.amount), report.currency,
                                             int(report.timestamp), channel, report.report_id))
        if report.evidence_associations:
            self.evidence.record(report.evidence_associations)
        return edges

    def freeze(self) -> "TransactionGraph":
        self._check()
        self._frozen = True
        return TransactionGraph.from_builder(self)


def _codes(values: Sequence[str]) -> tuple[list[str], np.ndarray]:
    table = sorted(set(values))
    lookup = {v: i for i, v in enumerate(table)}
    return table, np.fromiter((lookup[v] for v in values), dtype=np.int64, count=len(values))


class TransactionGraph:
    """Frozen graph. All array attributes are read-only."""

    def __init__(self, party_ids, country, age, kind, tagged,
                 tx_src, tx_dst, tx_amount, tx_currency, currencies, tx_timestamp,
                 tx_channel, tx_report, report_ids, evidence: EvidenceIndex,
                 pairs: PairTable | None = None, evidence_keys=None):
        self.party_ids: list[str] = list(party_ids)
        self._index = {p: i for i, p in enumerate(self.party_ids)}
        if len(self._index) != len(self.party_ids):
            raise GraphError("party ids must be unique")
        n = len(self.party_ids)
        self.country = np.asarray(country, dtype=object)
        self.age = np.asarray(age, dtype=np.float64)
        self.kind = np.asarray(kind, dtype=np.int8)
        self.tagged = np.asarray(tagged, dtype=bool)
        self.tx_src = np.asarray(tx_src, dtype=np.int64)
        self.tx_dst = np.asarray(tx_dst, dtype=np.int64)
        self.tx_amount = np.asarray(tx_amount, dtype=np.float64)
        self.tx_currency = np.asarray(tx_currency, dtype=np.int64)
        self.currencies = list(currencies)
        self.tx_timestamp = np.asarray(tx_timestamp, dtype=np.int64)
        self.tx_channel = np.asarray(tx_channel, dtype=np.int8)
        self.tx_report = np.asarray(tx_report, dtype=np.int64)
        self.report_ids = list(report_ids)
        if self.tx_src.size and (self.tx_src.max() >= n or self.tx_dst.max() >= n):
            raise GraphError("edge endpoint outside party table")
        if np.any(self.tx_amount < 0):
            raise GraphError("negative transaction amount")
        self.evidence = evidence
        evidence.frozen = True
        self.evidence_keys: list[EvidenceKey] = list(evidence_keys) if evidence_keys is not None else evidence.keys()
        self._key_ids = {k: i for i, k in enumerate(self.evidence_keys)}
        if pairs is None:
            pairs = pair_table(evidence, self.evidence_keys, range(len(self.evidence_keys)), self._index)
        self._pairs = pairs
        self.sup_a, self.sup_b, self.sup_weight, self.sup_evidence = reduce_pairs(pairs)
        self._build_adjacency()
        for arr in self._arrays():
            arr.setflags(write=False)

    # ---- construction helpers

    @classmethod
    def from_builder(cls, builder: GraphBuilder) -> "TransactionGraph":
        ps = builder.parties
        currencies, cur = _codes(builder.currency)
        report_ids, rep = _codes(builder.report)
        return cls(
            [p.id for p in ps], [p.country for p in ps],
            [np.nan if p.age is None else p.age for p in ps],
            [PARTY_KINDS.index(p.party_kind) for p in ps],
            [p.tagged_suspicious for p in ps],
            builder.src, builder.dst, builder.amount, cur, currencies,
            builder.timestamp, builder.channel, rep, report_ids, builder.evidence,
        )

    def extended(self, parties: Iterable[Party] = (), reports: Iterable["ReportRecord"] = ()) -> "TransactionGraph":
        """Append-only update returning a new frozen graph.

        Supplementary weights are recomputed only for evidence keys touched by
        the new reports.
        """
        parties = list(parties)
        reports = list(reports)
        ids = self.party_ids + [p.id for p in parties]
        index = dict(self._index)
        for p in parties:
            if p.id in index:
                raise GraphError(f"duplicate party id {p.id!r}")
            index[p.id] = len(index)
        evidence = self.evidence.copy()
        cur_lookup = {c: i for i, c in enumerate(self.currencies)}
        currencies = list(self.currencies)
        rep_ids = list(self.report_ids)
        new = {k: [] for k in ("src", "dst", "amount", "cur", "ts", "chan", "rep")}
        touched: set[EvidenceKey] = set()
        for report in reports:
            if not report.senders or not report.receivers:
                raise GraphError(f"report {report.report_id!r}: needs senders and receivers")
            if report.amount < 0:
                raise GraphError(f"report {report.report_id!r}: negative amount")
            for pid in list(report.senders) + list(report.receivers) + [p for p, _ in report.evidence_associations]:
                if pid not in index:
                    raise GraphError(f"report {report.report_id!r}: unknown party {pid!r}")
            if report.currency not in cur_lookup:
                cur_lookup[report.currency] = len(currencies)
                currencies.append(report.currency)
            rep_code = len(rep_ids)
            rep_ids.append(report.report_id)
            chan = CHANNELS.index(Channel(report.channel))
            for s in report.senders:
                for r in report.receivers:
                    new["src"].append(index[s])
                    new["dst"].append(index[r])
                    new["amount"].append(float(report.amount))
                    new["cur"].append(cur_lookup[report.currency])
                    new["ts"].append(int(report.timestamp))
                    new["chan"].append(chan)
                    new["rep"].append(rep_code)
            if report.evidence_associations:
                touched |= evidence.record(report.evidence_associations)
        keys = list(self.evidence_keys)
        key_ids = dict(self._key_ids)
        for key in sorted(touched):
            if key not in key_ids:
                key_ids[key] = len(keys)
                keys.append(key)
        touched_ids = [key_ids[k] for k in sorted(touched)]
        pairs = self._pairs.without(touched_ids).concat(
            pair_table(evidence, sorted(touched), touched_ids, index))
        cat = np.concatenate
        return TransactionGraph(
            ids,
            cat([self.country, np.asarray([p.country for p in parties], dtype=object)]),
            cat([self.age, [np.nan if p.age is None else p.age for p in parties]]),
            cat([self.kind, [PARTY_KINDS.index(p.party_kind) for p in parties]]),
            cat([self.tagged, [p.tagged_suspicious for p in parties]]),
            cat([self.tx_src, new["src"]]), cat([self.tx_dst, new["dst"]]),
            cat([self.tx_amount, new["amount"]]), cat([self.tx_currency, new["cur"]]), currencies,
            cat([self.tx_timestamp, new["ts"]]), cat([self.tx_channel, new["chan"]]),
            cat([self.tx_report, new["rep"]]), rep_ids, evidence, pairs=pairs, evidence_keys=keys,
        )

    def _build_adjacency(self):
        n = self.n_parties
        src, dst = self.tx_src, self.tx_dst
        off = src != dst
        # distinct undirected transaction neighbours, self-loops dropped
        u = np.concatenate([src[off], dst[off]])
        v = np.concatenate([dst[off], src[off]])
        if u.size:
            key = np.unique(u * max(n, 1) + v)
            u, v = key // max(n, 1), key % max(n, 1)
        self.tx_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(u, minlength=n), out=self.tx_indptr[1:])
        self.tx_indices = v.astype(np.int64)
        self.tx_degree = np.diff(self.tx_indptr)
        # incident transaction edge ids per party (both directions, loops once)
        eid = np.arange(src.size, dtype=np.int64)
        ends = np.concatenate([src, dst[off]])
        ids = np.concatenate([eid, eid[off]])
        order = np.lexsort((ids, ends))
        self.inc_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=n), out=self.inc_indptr[1:])
        self.inc_edges = ids[order]
        # supplementary adjacency with weights and edge ids
        a, b = self.sup_a, self.sup_b
        su = np.concatenate([a, b])
        sv = np.concatenate([b, a])
        sid = np.concatenate([np.arange(a.size), np.arange(a.size)]).astype(np.int64)
        order = np.lexsort((sv, su))
        self.sup_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(su, minlength=n), out=self.sup_indptr[1:])
        self.sup_indices = sv[order].astype(np.int64)
        self.sup_edge_ids = sid[order]
        self.sup_adj_weight = np.concatenate([self.sup_weight, self.sup_weight])[order]

    def _arrays(self):
        return [self.age, self.kind, self.tagged, self.tx_src, self.tx_dst, self.tx_amount,
                self.tx_currency, self.tx_timestamp, self.tx_channel, self.tx_report,
                self.sup_a, self.sup_b, self.sup_weight, self.sup_evidence,
                self.tx_indptr, self.tx_indices, self.tx_degree, self.inc_indptr, self.inc_edges,
                self.sup_indptr, self.sup_indices, self.sup_edge_ids, self.sup_adj_weight]

    # ---- queries

    @property
    def n_parties(self) -> int:
        return len(self.party_ids)

    @property
    def n_transaction_edges(self) -> int:
        return int(self.tx_src.size)

    @property
    def n_supplementary_edges(self) -> int:
        return int(self.sup_a.size)

    def index_of(self, party_id: str) -> int:
        try:
            return self._index[party_id]
        except KeyError:
            raise GraphError(f"unknown party {party_id!r}") from None

    def __contains__(self, party_id) -> bool:
        return party_id in self._index

    def party(self, party_id: str) -> Party:
        i = self.index_of(party_id)
        age = self.age[i]
        return Party(self.party_ids[i], str(self.country[i]), None if math.isnan(age) else float(age),
                     PARTY_KINDS[self.kind[i]], bool(self.tagged[i]))

    def parties(self) -> list[Party]:
        return [self.party(p) for p in self.party_ids]

    def transaction_edges(self) -> list[TransactionEdge]:
        ids = self.party_ids
        return [TransactionEdge(ids[s], ids[d], a, self.currencies[c], t, CHANNELS[ch], self.report_ids[r])
                for s, d, a, c, t, ch, r in zip(self.tx_src.tolist(), self.tx_dst.tolist(),
                                                self.tx_amount.tolist(), self.tx_currency.tolist(),
                                                self.tx_timestamp.tolist(), self.tx_channel.tolist(),
                                                self.tx_report.tolist())]

    def supplementary_edges(self) -> list[SupplementaryEdge]:
        ids = self.party_ids
        return [SupplementaryEdge(ids[a], ids[b], w, self.evidence_keys[e])
                for a, b, w, e in zip(self.sup_a.tolist(), self.sup_b.tolist(),
                                      self.sup_weight.tolist(), self.sup_evidence.tolist())]

    def tagged_parties(self) -> list[str]:
        return [self.party_ids[i] for i in np.flatnonzero(self.tagged)]

    def transaction_neighbours(self, i: int) -> np.ndarray:
        return self.tx_indices[self.tx_indptr[i]:self.tx_indptr[i + 1]]

    def supplementary_neighbours(self, i: int, min_weight: float = 0.0) -> np.ndarray:
        lo, hi = self.sup_indptr[i], self.sup_indptr[i + 1]
        return self.sup_indices[lo:hi][self.sup_adj_weight[lo:hi] >= min_weight]

    @cached_property
    def _component_cache(self) -> dict:
        return {}

    def component_labels(self, min_weight: float = 0.0) -> np.ndarray:
        """Component id per party over transaction edges and supplementary edges of weight >= ``min_weight``."""
        key = ("labels", float(min_weight))
        cache = self._component_cache
        if key not in cache:
            keep = self.sup_weight >= min_weight
            a = np.concatenate([self.tx_src, self.sup_a[keep]])
            b = np.concatenate([self.tx_dst, self.sup_b[keep]])
            labels = kernels.component_labels(self.n_parties, a, b)
            labels.setflags(write=False)
            cache[key] = labels
        return cache[key]

    def summary(self) -> dict:
        labels = self.component_labels()
        sizes = np.bincount(labels) if labels.size else np.zeros(0, dtype=np.int64)
        return {
            "parties": self.n_parties,
            "transaction_edges": self.n_transaction_edges,
            "supplementary_edges": self.n_supplementary_edges,
            "total_edges": self.n_transaction_edges + self.n_supplementary_edges,
            "connected_components": int(sizes.size),
            "parties_in_largest_component": int(sizes.max()) if sizes.size else 0,
            "evidence_keys": len(self.evidence_keys),
            "reports": len(self.report_ids),
        }


def connected_components(graph: TransactionGraph) -> list[list[str]]:
    """Partition of parties into weakly connected blocks over both edge types.

    Blocks are listed by their earliest party; members keep graph order.
    """
    labels = graph.component_labels()
    if labels.size == 0:
        return []
    order = np.argsort(labels, kind="stable")
    cuts = np.flatnonzero(np.diff(labels[order])) + 1
    return [[graph.party_ids[i] for i in block] for block in np.split(order, cuts)]


def transaction_neighbour_count(graph: TransactionGraph, party_id: str) -> int:
    """Distinct parties sharing at least one transaction edge with ``party_id``."""
    return int(graph.tx_degree[graph.index_of(party_id)])
