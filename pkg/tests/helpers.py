"""Graph builders and independent oracles shared by the tests."""

from __future__ import annotations

from fractions import Fraction

import networkx as nx
import numpy as np

from laundergraph.graph import Channel, EvidenceKey, GraphBuilder, Party
from laundergraph.ingest import ReportRecord

TRANSFER = Channel.INTERNATIONAL_TRANSFER
CASH = Channel.CASH_DEPOSIT


def pid(i):
    return f"p{i:04d}"


def report(rid, senders, receivers, amount=100.0, t=0, channel=TRANSFER, currency="AUD", assoc=()):
    return ReportRecord(rid, channel, tuple(senders), tuple(receivers), float(amount), currency, int(t),
                        tuple(assoc))


def graph_from(edges, n=None, sup=(), parties=None):
    """Graph with one transfer report per ``(a, b)`` edge.

    ``sup`` holds ``(party list, key value)`` groups; each group becomes one
    report associating every listed party with a shared account.
    """
    names = sorted({x for e in edges for x in e} | {x for grp, _ in sup for x in grp})
    if n is not None:
        names = [pid(i) for i in range(n)]
    b = GraphBuilder(parties or [Party(x, "AU") for x in names])
    for i, (a, c) in enumerate(edges):
        b.add_transaction(report(f"r{i}", [a], [c], t=i))
    for j, (grp, value) in enumerate(sup):
        key = EvidenceKey("shared_account", value)
        b.add_transaction(report(f"s{j}", [grp[0]], [grp[0]], t=j, channel=CASH,
                                 assoc=[(x, key) for x in grp]))
    return b.freeze()


def random_graph(rng: np.random.Generator, n: int, p_tx: float = 0.03, n_hubs: int = 2, hub_deg: int = 12,
                 n_keys: int = 10):
    parties = [Party(pid(i), "AU" if rng.random() < 0.7 else "NZ") for i in range(n)]
    b = GraphBuilder(parties)
    r = 0
    m = rng.binomial(n * (n - 1) // 2, p_tx)
    for _ in range(m):
        a, c = rng.integers(0, n, 2)
        b.add_transaction(report(f"r{r}", [pid(a)], [pid(c)], t=int(rng.integers(0, 10**6))))
        r += 1
    for _ in range(n_hubs):
        h = int(rng.integers(n))
        for c in rng.choice(n, size=min(n, hub_deg), replace=False):
            b.add_transaction(report(f"r{r}", [pid(h)], [pid(int(c))], t=r))
            r += 1
    for k in range(n_keys):
        key = EvidenceKey("shared_agent" if k % 2 else "shared_account", f"e{k}")
        holders = rng.choice(n, size=int(rng.integers(2, 6)), replace=False)
        for _ in range(int(rng.integers(1, 5))):
            sub = [int(x) for x in holders if rng.random() < 0.6] or [int(holders[0])]
            b.add_transaction(report(f"r{r}", [pid(sub[0])], [pid(sub[-1])], t=r,
                                     assoc=[(pid(x), key) for x in sub]))
            r += 1
    return b.freeze()


# ---------------------------------------------------------------- oracles


def weight_oracle(n_p, n_q, d_e):
    """Exact evaluation of the evidence weight with the degenerate and clamp rules."""
    first = Fraction(n_p, d_e)
    rest = d_e - n_p
    second = Fraction(1) if rest == 0 else Fraction(n_q, rest)
    v = first * second
    return float(min(max(v, Fraction(0)), Fraction(1)))


def raw_tx_degree(graph):
    nb = [set() for _ in range(graph.n_parties)]
    for a, b in zip(graph.tx_src.tolist(), graph.tx_dst.tolist()):
        if a != b:
            nb[a].add(b)
            nb[b].add(a)
    return [len(s) for s in nb]


def extraction_oracle(graph, seed: str, params) -> set[str]:
    """Member set via reachability in the (party, step) product graph."""
    k = params.k
    deg = raw_tx_degree(graph)
    ids = graph.party_ids
    # self-loops move nothing between parties and are not walked
    tx = {(a, b) for a, b in zip(graph.tx_src.tolist(), graph.tx_dst.tolist()) if a != b}
    tx |= {(b, a) for a, b in tx}
    sup = {}
    for e in graph.supplementary_edges():
        i, j = graph.index_of(e.a), graph.index_of(e.b)
        sup[(i, j)] = sup[(j, i)] = e.weight
    s = graph.index_of(seed)
    if params.component_shortcut:
        floor = min(params.w_min)
        G = nx.Graph()
        G.add_nodes_from(range(graph.n_parties))
        G.add_edges_from(tx)
        G.add_edges_from(e for e, w in sup.items() if w >= floor)
        comp = nx.node_connected_component(G, s)
        if nx.diameter(G.subgraph(comp)) <= k:
            return {ids[i] for i in comp}
    P = nx.DiGraph()
    P.add_node((s, 0))
    for r in range(k):
        for a, b in tx:
            if deg[a] <= params.n_max[r]:
                P.add_edge((a, r), (b, r + 1))
        for (a, b), w in sup.items():
            if w >= params.w_min[r]:
                P.add_edge((a, r), (b, r + 1))
    reach = nx.descendants(P, (s, 0)) | {(s, 0)}
    return {ids[v] for v, _ in reach}


def bfs_diameter(nodes, edges):
    adj = {v: set() for v in nodes}
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    best = 0
    for s in nodes:
        dist = {s: 0}
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if len(dist) < len(nodes):
            return None
        best = max(best, max(dist.values()))
    return best


def haar_oracle_bursts(counts, c):
    """Direct Haar computation with explicit basis vectors."""
    counts = [float(x) for x in counts]
    n = len(counts)
    size = 1
    while size < n:
        size *= 2
    x = counts + [0.0] * (size - n)
    covered = [False] * size
    span = 2
    while span <= size:
        coefs = []
        for i in range(size // span):
            lo = i * span
            half = span // 2
            d = (sum(x[lo:lo + half]) - sum(x[lo + half:lo + span])) / (span ** 0.5)
            coefs.append(abs(d))
        if len(coefs) >= 2:
            for i, d in enumerate(coefs):
                others = coefs[:i] + coefs[i + 1:]
                mu = sum(others) / len(others)
                sd = (sum((o - mu) ** 2 for o in others) / len(others)) ** 0.5
                if d > mu + c * sd + 1e-9 * (sum(abs(v) for v in counts) + 1.0):
                    for j in range(i * span, (i + 1) * span):
                        covered[j] = True
        span *= 2
    mean = sum(counts) / n
    flagged = [covered[i] and counts[i] > mean for i in range(n)]
    out = []
    i = 0
    while i < n:
        if flagged[i]:
            j = i
            while j + 1 < n and flagged[j + 1]:
                j += 1
            out.append((i, j, max(counts[i:j + 1]) / mean))
            i = j + 1
        else:
            i += 1
    return out


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def constant_forest(n_trees, n_positive, n_features):
    """Forest of single-leaf trees; exactly ``n_positive`` vote positive."""
    from laundergraph.learn import RandomForestModel, Tree
    from laundergraph.features import DEFAULT_SCHEMA

    trees = []
    for t in range(n_trees):
        counts = np.array([[0, 1]] if t < n_positive else [[1, 0]], dtype=np.int64)
        trees.append(Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), counts,
                          np.zeros(0, dtype=np.int64)))
    return RandomForestModel(trees, n_features, 1, 0, DEFAULT_SCHEMA.hash, DEFAULT_SCHEMA.version)
