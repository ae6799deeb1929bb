"""Community feature vectors: demographic, network, transaction and dynamic blocks."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .community import Community, community_adjacency, diameter
from .graph import CHANNELS, PARTY_KINDS, Channel, PartyKind

DAY = 86400
CATEGORIES = ("demographic", "network", "transaction", "dynamic")


class SchemaMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    category: str
    sentinel: float | None = None


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]
    version: str = "1"

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        for f in self.features:
            if f.category not in CATEGORIES:
                raise ValueError(f"unknown category {f.category!r}")

    def __len__(self):
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def block(self, category: str) -> list[str]:
        return [f.name for f in self.features if f.category == category]

    def to_json(self) -> dict:
        return {"version": self.version,
                "features": [[f.name, f.category, f.sentinel] for f in self.features]}

    @property
    def hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:16]


def _spec(category, *items):
    out = []
    for item in items:
        name, sentinel = item if isinstance(item, tuple) else (item, None)
        out.append(FeatureSpec(name, category, sentinel))
    return out


DEFAULT_SCHEMA = FeatureSchema(tuple(
    _spec("demographic", ("age_mean", -1.0), ("age_min", -1.0), ("age_max", -1.0),
          "frac_business", "n_countries", "modal_country_frac")
    + _spec("network", "n_parties", "n_tx_edges", "n_sup_edges", "density", "transitivity",
            "diameter", "degree_mean", "degree_max", ("sup_weight_mean", -1.0))
    + _spec("transaction", "cash_total", "cash_mean", "transfer_total", "transfer_mean",
            "n_transactions", "n_currencies", "cross_border_frac", "n_self_loops", "amount_max")
    + _spec("dynamic", "n_bursts", "burst_intensity_max", "burst_tx_frac", "n_high_amounts",
            "n_active_days", ("gap_mean", -1.0))
))


@dataclass
class FeatureVector:
    values: np.ndarray
    community: Community | None = None
    schema: FeatureSchema = DEFAULT_SCHEMA

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.schema),):
            raise SchemaMismatchError(f"expected {len(self.schema)} values, got {self.values.shape}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.schema.names, self.values.tolist()))


# --------------------------------------------------------------------------
# demographic


def demographic_features(community: Community) -> dict[str, float]:
    g = community.graph
    m = community.members
    ages = g.age[m]
    ages = ages[~np.isnan(ages)]
    out = {}
    if ages.size:
        out.update(age_mean=float(ages.mean()), age_min=float(ages.min()), age_max=float(ages.max()))
    else:
        out.update(age_mean=-1.0, age_min=-1.0, age_max=-1.0)
    kinds = g.kind[m]
    business = PARTY_KINDS.index(PartyKind.BUSINESS)
    out["frac_business"] = float(np.mean(kinds == business)) if m.size else 0.0
    countries = np.asarray([str(c) for c in g.country[m]])
    if countries.size:
        _, counts = np.unique(countries, return_counts=True)
        out["n_countries"] = float(counts.size)
        out["modal_country_frac"] = float(counts.max() / countries.size)
    else:
        out["n_countries"] = 0.0
        out["modal_country_frac"] = 0.0
    return out


# --------------------------------------------------------------------------
# network


def transitivity(adj) -> float:
    """Global clustering: 3 x triangles / connected triples, on a 0/1 symmetric matrix."""
    deg = np.asarray(adj.sum(axis=1)).ravel()
    triples = float(np.sum(deg * (deg - 1)))
    if triples == 0:
        return 0.0
    a2 = adj @ adj
    closed = float(a2.multiply(adj).sum())  # trace(A^3)
    return closed / triples


def network_features(community: Community) -> dict[str, float]:
    g = community.graph
    n = community.size
    adj = community_adjacency(community)
    deg = np.asarray(adj.sum(axis=1)).ravel()
    n_simple = adj.nnz // 2
    sup = community.sup_edges
    return {
        "n_parties": float(n),
        "n_tx_edges": float(community.tx_edges.size),
        "n_sup_edges": float(sup.size),
        "density": 2.0 * n_simple / (n * (n - 1)) if n > 1 else 0.0,
        "transitivity": transitivity(adj),
        "diameter": float(diameter(community)),
        "degree_mean": float(deg.mean()) if n else 0.0,
        "degree_max": float(deg.max()) if n else 0.0,
        "sup_weight_mean": float(g.sup_weight[sup].mean()) if sup.size else -1.0,
    }


# --------------------------------------------------------------------------
# transaction


def transaction_features(community: Community) -> dict[str, float]:
    g = community.graph
    e = community.tx_edges
    amount = g.tx_amount[e]
    channel = g.tx_channel[e]
    cash_code = CHANNELS.index(Channel.CASH_DEPOSIT)
    cash = amount[channel == cash_code]
    transfer = amount[channel != cash_code]
    src, dst = g.tx_src[e], g.tx_dst[e]
    country = g.country
    cross = sum(1 for a, b in zip(src.tolist(), dst.tolist()) if country[a] != country[b])
    return {
        "cash_total": float(cash.sum()),
        "cash_mean": float(cash.mean()) if cash.size else 0.0,
        "transfer_total": float(transfer.sum()),
        "transfer_mean": float(transfer.mean()) if transfer.size else 0.0,
        "n_transactions": float(e.size),
        "n_currencies": float(np.unique(g.tx_currency[e]).size),
        "cross_border_frac": cross / e.size if e.size else 0.0,
        "n_self_loops": float(np.sum(src == dst)),
        "amount_max": float(amount.max()) if e.size else 0.0,
    }


# --------------------------------------------------------------------------
# bursts


@dataclass(frozen=True)
class BinnedSeries:
    bin_width: int
    origin: int
    counts: np.ndarray
    amounts: np.ndarray

    @classmethod
    def from_events(cls, timestamps, amounts=None, bin_width: int = DAY, origin: int | None = None):
        t = np.asarray(timestamps, dtype=np.int64)
        a = np.zeros(t.size) if amounts is None else np.asarray(amounts, dtype=np.float64)
        if t.size == 0:
            return cls(bin_width, 0 if origin is None else origin, np.zeros(0, np.int64), np.zeros(0))
        origin = int(t.min()) if origin is None else int(origin)
        if t.min() < origin:
            raise ValueError("event before series origin")
        b = (t - origin) // bin_width
        n = int(b.max()) + 1
        return cls(bin_width, origin, np.bincount(b, minlength=n).astype(np.int64),
                   np.bincount(b, weights=a, minlength=n))

    def __len__(self):
        return int(self.counts.size)

    def bin_of(self, timestamps) -> np.ndarray:
        return (np.asarray(timestamps, dtype=np.int64) - self.origin) // self.bin_width


def haar_details(x: np.ndarray) -> list[np.ndarray]:
    """Orthonormal Haar detail coefficients, finest level first.

    ``x`` must have power-of-two length. Coefficient ``i`` at level ``j``
    (1-based) covers bins ``[i * 2**j, (i + 1) * 2**j)``.
    """
    a = np.asarray(x, dtype=np.float64)
    out = []
    while a.size > 1:
        even, odd = a[0::2], a[1::2]
        out.append((even - odd) / math.sqrt(2.0))
        a = (even + odd) / math.sqrt(2.0)
    return out


def burst_detect(series: BinnedSeries | Sequence[float], c: float = 2.0) -> list[tuple[int, int, float]]:
    """Bursts as ``(start_bin, end_bin, intensity)`` with inclusive ends.

    A detail coefficient is significant when its magnitude exceeds the mean
    plus ``c`` standard deviations of the other magnitudes at its level (by
    more than round-off). Bins
    covered by a significant coefficient whose count is above the series mean
    are flagged and merged into maximal runs.
    """
    counts = np.asarray(series.counts if isinstance(series, BinnedSeries) else series, dtype=np.float64)
    n = counts.size
    if n < 2:
        raise ValueError("burst detection needs at least two bins")
    if not counts.any():
        return []
    size = 1 << (n - 1).bit_length()
    padded = np.zeros(size)
    padded[:n] = counts
    covered = np.zeros(size, dtype=bool)
    # margin absorbing round-off between coefficients equal in exact arithmetic;
    # the series total bounds every coefficient
    eps = 1e-9 * (float(np.abs(counts).sum()) + 1.0)
    for level, d in enumerate(haar_details(padded), start=1):
        m = d.size
        if m < 2:
            continue
        mag = np.abs(d)
        s1 = mag.sum()
        s2 = np.square(mag).sum()
        # leave-one-out mean and population variance
        mean = (s1 - mag) / (m - 1)
        var = np.maximum((s2 - np.square(mag)) / (m - 1) - np.square(mean), 0.0)
        sig = mag > mean + c * np.sqrt(var) + eps
        span = 1 << level
        for i in np.flatnonzero(sig).tolist():
            covered[i * span:(i + 1) * span] = True
    mu = counts.mean()
    flagged = covered[:n] & (counts > mu)
    bursts = []
    i = 0
    while i < n:
        if flagged[i]:
            j = i
            while j + 1 < n and flagged[j + 1]:
                j += 1
            bursts.append((i, j, float(counts[i:j + 1].max() / mu)))
            i = j + 1
        else:
            i += 1
    return bursts


def high_amount_count(amounts) -> int:
    """Amounts strictly above mean + 2 population standard deviations."""
    a = np.asarray(amounts, dtype=np.float64)
    if a.size < 2:
        return 0
    return int(np.sum(a > a.mean() + 2.0 * a.std()))


def dynamic_features(community: Community, bin_width: int = DAY, c: float = 2.0) -> dict[str, float]:
    g = community.graph
    e = community.tx_edges
    t = g.tx_timestamp[e]
    out = {"n_bursts": 0.0, "burst_intensity_max": 0.0, "burst_tx_frac": 0.0,
           "n_high_amounts": float(high_amount_count(g.tx_amount[e])),
           "n_active_days": float(np.unique(t // DAY).size), "gap_mean": -1.0}
    if t.size >= 2:
        out["gap_mean"] = float(np.diff(np.sort(t)).mean())
    series = BinnedSeries.from_events(t, g.tx_amount[e], bin_width)
    if len(series) >= 2:
        bursts = burst_detect(series, c)
        if bursts:
            out["n_bursts"] = float(len(bursts))
            out["burst_intensity_max"] = max(b[2] for b in bursts)
            inside = sum(int(series.counts[s:t1 + 1].sum()) for s, t1, _ in bursts)
            out["burst_tx_frac"] = inside / t.size
    return out


# --------------------------------------------------------------------------


def featurize(community: Community, schema: FeatureSchema = DEFAULT_SCHEMA,
              bin_width: int = DAY, c: float = 2.0) -> FeatureVector:
    if schema.hash != DEFAULT_SCHEMA.hash:
        raise SchemaMismatchError(f"unsupported feature schema {schema.version}/{schema.hash}")
    values = {}
    values.update(demographic_features(community))
    values.update(network_features(community))
    values.update(transaction_features(community))
    values.update(dynamic_features(community, bin_width, c))
    vec = np.array([values[name] for name in schema.names], dtype=np.float64)
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"non-finite feature for community {community.seed_id!r}")
    return FeatureVector(vec, community, schema)


def feature_matrix(communities: Iterable[Community], schema: FeatureSchema = DEFAULT_SCHEMA,
                   bin_width: int = DAY, c: float = 2.0) -> np.ndarray:
    rows = [featurize(cm, schema, bin_width, c).values for cm in communities]
    if not rows:
        return np.zeros((0, len(schema)))
    return np.vstack(rows)


def write_feature_csv(path, X: np.ndarray, schema: FeatureSchema = DEFAULT_SCHEMA,
                      seeds: Sequence[str] | None = None, labels: Sequence[int] | None = None):
    header = (["seed"] if seeds is not None else []) + schema.names + (["label"] if labels is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, row in enumerate(np.asarray(X)):
            out = ([seeds[i]] if seeds is not None else []) + [repr(float(v)) for v in row]
            if labels is not None:
                out.append(int(labels[i]))
            w.writerow(out)


def read_feature_csv(path, schema: FeatureSchema = DEFAULT_SCHEMA):
    """Returns ``(X, seeds or None, labels or None)``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    has_seed = header[0] == "seed"
    has_label = header[-1] == "label"
    names = header[int(has_seed):len(header) - int(has_label)]
    if names != schema.names:
        raise SchemaMismatchError("feature columns do not match schema")
    lo, hi = int(has_seed), len(header) - int(has_label)
    X = np.array([[float(v) for v in r[lo:hi]] for r in body]).reshape(len(body), len(names))
    seeds = [r[0] for r in body] if has_seed else None
    labels = np.array([int(r[-1]) for r in body]) if has_label else None
    return X, seeds, labels
