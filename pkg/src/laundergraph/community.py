"""Near-k-step neighbourhood extraction around seed parties.

Expansion runs for ``k`` rounds. In round ``r`` (0-based) every frontier party
whose distinct transaction-neighbour count is at most ``n_max[r]`` contributes
its transaction neighbours; every frontier party contributes supplementary
neighbours over edges of weight ``>= w_min[r]``. The next frontier is the full
set of parties reached in that round, so a party reached early is expanded
again when a later round reaches it. Parties above the gate limit are kept as
members but never expanded through their transaction edges.
"""

from __future__ import annotations

import json
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from . import kernels
from .graph import GraphError, TransactionGraph
from .kernels.numpy_impl import _ragged_positions


class ExtractionError(GraphError):
    pass


class DisconnectedCommunityError(ExtractionError):
    pass


def _broadcast(value, k, cast):
    if isinstance(value, (int, float, np.integer, np.floating)):
        return tuple(cast(value) for _ in range(k))
    out = tuple(cast(v) for v in value)
    if len(out) == 1:
        return out * k
    return out


@dataclass(frozen=True)
class ExtractionParams:
    k: int = 3
    n_max: tuple = 40
    w_min: tuple = 0.01
    component_shortcut: bool = True

    def __post_init__(self):
        k = int(self.k)
        if k < 1:
            raise ValueError("k must be >= 1")
        n_max = _broadcast(self.n_max, k, int)
        w_min = _broadcast(self.w_min, k, float)
        if len(n_max) != k or len(w_min) != k:
            raise ValueError("n_max and w_min need one entry per step")
        if any(n < 1 for n in n_max):
            raise ValueError("n_max entries must be >= 1")
        if any(not (0.0 <= w <= 1.0) for w in w_min):
            raise ValueError("w_min entries must lie in [0, 1]")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "n_max", n_max)
        object.__setattr__(self, "w_min", w_min)
        object.__setattr__(self, "component_shortcut", bool(self.component_shortcut))

    @property
    def floor(self) -> float:
        return min(self.w_min)

    @property
    def n_max_array(self) -> np.ndarray:
        return np.asarray(self.n_max, dtype=np.int64)

    @property
    def w_min_array(self) -> np.ndarray:
        return np.asarray(self.w_min, dtype=np.float64)

    def to_json(self) -> dict:
        return {"k": self.k, "n_max": list(self.n_max), "w_min": list(self.w_min),
                "component_shortcut": self.component_shortcut}

    @classmethod
    def from_json(cls, obj: dict) -> "ExtractionParams":
        return cls(obj["k"], tuple(obj["n_max"]), tuple(obj["w_min"]), obj.get("component_shortcut", True))


def _in_sorted(values: np.ndarray, sorted_arr: np.ndarray) -> np.ndarray:
    if sorted_arr.size == 0:
        return np.zeros(values.shape, dtype=bool)
    pos = np.searchsorted(sorted_arr, values)
    pos[pos == sorted_arr.size] = 0
    return sorted_arr[pos] == values


class Community:
    """An extracted party set with its induced edges.

    ``masks`` holds, per member, a bit for every round after which the member
    was on the frontier (bit 0 is the seed itself). Communities produced by the
    component shortcut or by merging carry ``masks=None``; their supplementary
    edges are filtered at the smallest ``w_min`` entry instead.
    """

    def __init__(self, graph: TransactionGraph, seed: int, members: np.ndarray,
                 params: ExtractionParams, masks: np.ndarray | None = None,
                 component: int = -1, shortcut: bool = False, lineage: Sequence[str] = ()):
        self.graph = graph
        self.seed = int(seed)
        self.members = np.asarray(members, dtype=np.int64)
        self.members.setflags(write=False)
        self.masks = None if masks is None else np.asarray(masks, dtype=np.int64)
        self.params = params
        self.component = int(component)
        self.shortcut = bool(shortcut)
        self.lineage = tuple(sorted(set(lineage) or {self.seed_id}))

    def __repr__(self):
        return f"Community(seed={self.seed_id!r}, size={self.size}, shortcut={self.shortcut})"

    @property
    def seed_id(self) -> str:
        return self.graph.party_ids[self.seed]

    @property
    def member_ids(self) -> list[str]:
        ids = self.graph.party_ids
        return [ids[i] for i in self.members]

    @property
    def size(self) -> int:
        return int(self.members.size)

    @cached_property
    def key(self) -> bytes:
        return self.members.tobytes()

    @cached_property
    def member_set(self) -> frozenset:
        return frozenset(self.members.tolist())

    @property
    def first_round(self) -> np.ndarray | None:
        if self.masks is None:
            return None
        low = self.masks & -self.masks
        return np.log2(low).astype(np.int64)

    @cached_property
    def tx_edges(self) -> np.ndarray:
        """Ids of transaction edges with both endpoints inside the community."""
        g = self.graph
        eids = np.unique(g.inc_edges[_ragged_positions(g.inc_indptr, self.members)])
        inside = _in_sorted(g.tx_src[eids], self.members) & _in_sorted(g.tx_dst[eids], self.members)
        return eids[inside]

    @cached_property
    def sup_edges(self) -> np.ndarray:
        """Ids of retained supplementary edges between members."""
        g = self.graph
        eids = np.unique(g.sup_edge_ids[_ragged_positions(g.sup_indptr, self.members)])
        a, b = g.sup_a[eids], g.sup_b[eids]
        inside = _in_sorted(a, self.members) & _in_sorted(b, self.members)
        eids, a, b = eids[inside], a[inside], b[inside]
        w = g.sup_weight[eids]
        if self.masks is None:
            return eids[w >= self.params.floor]
        k = self.params.k
        wmin = self.params.w_min_array
        # cheapest threshold among the rounds each member was expanded in
        bits = (self.masks[:, None] >> np.arange(k)[None, :]) & 1
        per_member = np.where(bits == 1, wmin[None, :], np.inf).min(axis=1)
        ta = per_member[np.searchsorted(self.members, a)]
        tb = per_member[np.searchsorted(self.members, b)]
        thr = np.minimum(ta, tb)
        thr[np.isinf(thr)] = wmin[k - 1]
        return eids[w >= thr]

    def to_json(self) -> dict:
        g = self.graph
        ids = g.party_ids
        return {
            "seed": self.seed_id,
            "members": self.member_ids,
            "masks": None if self.masks is None else self.masks.tolist(),
            "transaction_edges": [[ids[g.tx_src[e]], ids[g.tx_dst[e]], g.report_ids[g.tx_report[e]]]
                                  for e in self.tx_edges.tolist()],
            "supplementary_edges": [[ids[g.sup_a[e]], ids[g.sup_b[e]], float(g.sup_weight[e])]
                                    for e in self.sup_edges.tolist()],
            "params": self.params.to_json(),
            "provenance": {"component": self.component, "shortcut": self.shortcut},
            "lineage": list(self.lineage),
        }

    @classmethod
    def from_json(cls, graph: TransactionGraph, obj: dict) -> "Community":
        members = np.array(sorted(graph.index_of(p) for p in obj["members"]), dtype=np.int64)
        masks = obj.get("masks")
        if masks is not None:
            by_id = dict(zip(obj["members"], masks))
            masks = np.array([by_id[graph.party_ids[i]] for i in members], dtype=np.int64)
        prov = obj.get("provenance", {})
        return cls(graph, graph.index_of(obj["seed"]), members, ExtractionParams.from_json(obj["params"]),
                   masks=masks, component=prov.get("component", -1), shortcut=prov.get("shortcut", False),
                   lineage=obj.get("lineage", ()))


def write_communities(path, communities: Iterable[Community]):
    with open(path, "w", encoding="utf-8") as fh:
        for c in communities:
            fh.write(json.dumps(c.to_json()) + "\n")


def read_communities(path, graph: TransactionGraph) -> list[Community]:
    with open(path, "r", encoding="utf-8") as fh:
        return [Community.from_json(graph, json.loads(line)) for line in fh if line.strip()]


# --------------------------------------------------------------------------
# component shortcut


def _neighbours(graph: TransactionGraph, u: int, floor: float) -> np.ndarray:
    tx = graph.transaction_neighbours(u)
    return np.concatenate([tx, graph.supplementary_neighbours(u, floor)])


def _eccentricity(graph: TransactionGraph, src: int, floor: float, limit: int) -> int:
    """BFS eccentricity of ``src``, capped at ``limit + 1``."""
    dist = {src: 0}
    queue = deque([src])
    ecc = 0
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in _neighbours(graph, u, floor).tolist():
            if v not in dist:
                dist[v] = du + 1
                if du + 1 > limit:
                    return limit + 1
                ecc = max(ecc, du + 1)
                queue.append(v)
    return ecc


class _ComponentTable:
    def __init__(self, graph: TransactionGraph, floor: float):
        self.graph = graph
        self.floor = floor
        self.labels = graph.component_labels(floor)
        order = np.argsort(self.labels, kind="stable")
        self.order = order
        n_comp = int(self.labels.max()) + 1 if self.labels.size else 0
        self.ptr = np.zeros(n_comp + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.labels, minlength=n_comp), out=self.ptr[1:])
        self._small: dict[tuple[int, int], bool] = {}

    def members(self, comp: int) -> np.ndarray:
        return self.order[self.ptr[comp]:self.ptr[comp + 1]]

    def diameter_at_most(self, comp: int, k: int) -> bool:
        key = (comp, k)
        if key not in self._small:
            self._small[key] = self._check(self.members(comp), k)
        return self._small[key]

    def _check(self, nodes: np.ndarray, k: int) -> bool:
        if nodes.size <= 1:
            return True
        g = self.graph
        deg = g.tx_degree[nodes] + np.diff(g.sup_indptr)[nodes]
        hub = int(nodes[np.argmax(deg)])
        e0 = _eccentricity(g, hub, self.floor, k)
        if e0 > k:
            return False
        if 2 * e0 <= k:
            return True
        return all(_eccentricity(g, int(x), self.floor, k) <= k for x in nodes)


def _component_table(graph: TransactionGraph, floor: float) -> _ComponentTable:
    key = ("table", float(floor))
    cache = graph._component_cache
    if key not in cache:
        cache[key] = _ComponentTable(graph, float(floor))
    return cache[key]


# --------------------------------------------------------------------------
# extraction


def _expand(graph: TransactionGraph, seeds: np.ndarray, params: ExtractionParams):
    return kernels.expand_batch(graph.tx_indptr, graph.tx_indices, graph.tx_degree,
                                graph.sup_indptr, graph.sup_indices, graph.sup_adj_weight,
                                np.ascontiguousarray(seeds, dtype=np.int64),
                                params.n_max_array, params.w_min_array)


def _shortcut(graph: TransactionGraph, seed: int, params: ExtractionParams, table: _ComponentTable):
    comp = int(table.labels[seed])
    if params.component_shortcut and table.diameter_at_most(comp, params.k):
        return Community(graph, seed, np.sort(table.members(comp)), params,
                         component=comp, shortcut=True)
    return None


def extract(graph: TransactionGraph, seed: str, params: ExtractionParams | None = None) -> Community:
    """Near-k-step community of ``seed``."""
    params = params or ExtractionParams()
    try:
        s = graph.index_of(seed)
    except GraphError as exc:
        raise ExtractionError(str(exc)) from None
    table = _component_table(graph, params.floor)
    found = _shortcut(graph, s, params, table)
    if found is not None:
        return found
    _, members, masks = _expand(graph, np.array([s]), params)
    return Community(graph, s, members, params, masks=masks, component=int(table.labels[s]))


def deduplicate(communities: Iterable[Community]) -> list[Community]:
    """Collapse identical member sets, keeping the lowest seed id; ordered by seed id."""
    best: dict[bytes, Community] = {}
    for c in communities:
        held = best.get(c.key)
        if held is None or c.seed_id < held.seed_id:
            best[c.key] = c
    return sorted(best.values(), key=lambda c: c.seed_id)


def extract_batch(graph: TransactionGraph, seeds: Iterable[str], params: ExtractionParams | None = None,
                  workers: int = 1, errors: list | None = None, chunk_size: int = 256) -> list[Community]:
    """Deduplicated communities for many seeds.

    Unknown seeds raise :class:`ExtractionError` unless an ``errors`` list is
    supplied, in which case ``(seed, message)`` pairs are appended to it. The
    result does not depend on ``workers``.
    """
    params = params or ExtractionParams()
    table = _component_table(graph, params.floor)
    idx = []
    for seed in sorted(set(seeds)):
        if seed in graph:
            idx.append(graph.index_of(seed))
        elif errors is None:
            raise ExtractionError(f"unknown party {seed!r}")
        else:
            errors.append((seed, f"unknown party {seed!r}"))
    out: list[Community] = []
    pending = []
    for s in idx:
        found = _shortcut(graph, s, params, table)
        if found is None:
            pending.append(s)
        else:
            out.append(found)
    pending = np.asarray(pending, dtype=np.int64)
    chunks = [pending[i:i + chunk_size] for i in range(0, pending.size, chunk_size)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _expand(graph, c, params), chunks))
    else:
        results = [_expand(graph, c, params) for c in chunks]
    for chunk, (offsets, members, masks) in zip(chunks, results):
        for i, s in enumerate(chunk.tolist()):
            lo, hi = offsets[i], offsets[i + 1]
            out.append(Community(graph, s, members[lo:hi], params, masks=masks[lo:hi],
                                 component=int(table.labels[s])))
    return deduplicate(out)


def jaccard(a: Community, b: Community) -> float:
    sa, sb = a.member_set, b.member_set
    union = len(sa | sb)
    return len(sa & sb) / union if union else 1.0


def union_of(a: Community, b: Community) -> Community:
    """Union of two communities; keeps the seed and parameters of ``a``."""
    members = np.union1d(a.members, b.members)
    return Community(a.graph, a.seed, members, a.params, component=a.component,
                     lineage=a.lineage + b.lineage)


def merge_overlapping(suspicious: Sequence[Community], theta: float = 0.5) -> list[Community]:
    """Union communities whose member Jaccard is ``>= theta`` until none remain.

    Pairs are examined in (smaller seed id, larger seed id) order; the merged
    community takes the smaller seed.
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError("theta must lie in (0, 1]")
    items = sorted(suspicious, key=lambda c: c.seed_id)
    changed = True
    while changed:
        changed = False
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                if jaccard(items[i], items[j]) >= theta:
                    items[i] = union_of(items[i], items[j])
                    del items[j]
                    changed = True
                    break
            if changed:
                break
    return items


def community_adjacency(community: Community) -> csr_matrix:
    """Symmetric 0/1 adjacency of the simple undirected projection (no loops)."""
    g = community.graph
    m = community.members
    tx = community.tx_edges
    sup = community.sup_edges
    a = np.concatenate([g.tx_src[tx], g.sup_a[sup]])
    b = np.concatenate([g.tx_dst[tx], g.sup_b[sup]])
    keep = a != b
    ia = np.searchsorted(m, a[keep])
    ib = np.searchsorted(m, b[keep])
    rows = np.concatenate([ia, ib])
    cols = np.concatenate([ib, ia])
    adj = csr_matrix((np.ones(rows.size), (rows, cols)), shape=(m.size, m.size))
    adj.sum_duplicates()
    adj.data[:] = 1.0
    return adj


def diameter(community: Community) -> int:
    """Longest shortest path over the induced edges, direction ignored."""
    if community.size == 0:
        raise ExtractionError("empty community")
    if community.size == 1:
        return 0
    adj = community_adjacency(community)
    top = 0.0
    for lo in range(0, community.size, 512):
        rows = np.arange(lo, min(lo + 512, community.size))
        dist = shortest_path(adj, method="D", directed=False, unweighted=True, indices=rows)
        top = max(top, dist.max())
        if math.isinf(top):
            raise DisconnectedCommunityError(f"community of {community.seed_id!r} is disconnected")
    return int(top)
