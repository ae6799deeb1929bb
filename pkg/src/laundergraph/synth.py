"""Synthetic report corpora with injected laundering groups.

Background parties split into a preferential-attachment core (heavy-tailed
degrees, so hubs act as gates) and many small components. Weak shared-agent
evidence inside the core tops the supplementary edge count up toward the
configured ratio without changing connectivity.

Each injected group runs three phases: mules make sub-threshold cash deposits
into the coordinator's account (one shared account key links them), the
coordinator and foreign intermediaries exchange a dense burst of transfers
within a week, and intermediaries pay out to beneficiaries.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Channel, EvidenceKey, EvidenceKind, Party, PartyKind
from .ingest import ReportRecord, write_reports

HOME = "AU"
FOREIGN = ("NZ", "GB", "US", "CN", "VN", "HK", "SG", "IN", "PH", "MY")
CURRENCY = {"AU": "AUD", "NZ": "NZD", "GB": "GBP", "US": "USD", "CN": "CNY", "VN": "VND",
            "HK": "HKD", "SG": "SGD", "IN": "INR", "PH": "PHP", "MY": "MYR"}
YEAR = 365 * 86400
WEEK = 7 * 86400
SMALL_SIZES = np.array([1, 2, 3, 4])
SMALL_PROBS = np.array([0.45, 0.28, 0.17, 0.10])


@dataclass(frozen=True)
class SynthConfig:
    n_parties: int = 10000
    n_reports: int | None = None  # background core transfers; default 2 per core party
    component_fraction: float = 0.22
    sup_ratio: float = 0.24
    n_groups: int = 5
    group_size: tuple[int, int] = (5, 20)
    seed: int = 0
    start: int = 1577836800

    def __post_init__(self):
        if self.n_parties < 1 or self.n_groups < 0:
            raise ValueError("n_parties must be positive and n_groups non-negative")
        if not 0 < self.component_fraction < 1 or not 0 < self.sup_ratio < 1:
            raise ValueError("ratios must lie in (0, 1)")
        lo, hi = self.group_size
        if not 1 <= lo <= hi:
            raise ValueError("invalid group size range")
        if self.n_groups and lo < 4:
            raise ValueError("groups need at least 4 members")


@dataclass
class GroupTruth:
    group_id: str
    members: list[str]
    tagged: list[str]
    report_ids: list[str]


@dataclass
class GroundTruth:
    groups: list[GroupTruth] = field(default_factory=list)

    @property
    def tagged_parties(self) -> list[str]:
        return sorted({p for g in self.groups for p in g.tagged})

    def __len__(self):
        return len(self.groups)

    def to_json(self) -> dict:
        return {"groups": [asdict(g) for g in self.groups]}

    @classmethod
    def from_json(cls, obj: dict) -> "GroundTruth":
        return cls([GroupTruth(**g) for g in obj["groups"]])


class _Corpus:
    def __init__(self, rng, start):
        self.rng = rng
        self.start = start
        self.reports = []  # [timestamp, channel, senders, receivers, amount, currency, assoc, group]

    def add(self, t, channel, senders, receivers, amount, currency, assoc=None, group=None):
        self.reports.append([int(t), channel, list(senders), list(receivers), round(float(amount), 2),
                             currency, assoc if assoc is not None else [], group])
        return len(self.reports) - 1

    def when(self):
        return self.start + int(self.rng.integers(0, YEAR))


def _make_party(rng, pid, country=None, tagged=False):
    business = rng.random() < 0.15
    if business or rng.random() < 0.1:
        age = None
    else:
        age = float(rng.integers(18, 86))
    if country is None:
        country = HOME if rng.random() < 0.75 else FOREIGN[int(rng.integers(len(FOREIGN)))]
    return Party(pid, country, age, PartyKind.BUSINESS if business else PartyKind.INDIVIDUAL, tagged)


def _transfer_amount(rng):
    return min(250000.0, float(rng.lognormal(7.8, 1.1)))


def _cash_amount(rng):
    return min(60000.0, float(rng.lognormal(7.2, 1.0)))


def _preferential_attachment(rng, n, m_extra=0.15):
    """Edges of a preferential-attachment tree plus a few extra attachments."""
    if n < 2:
        return []
    targets = [0]
    edges = []
    for v in range(1, n):
        u = targets[int(rng.integers(len(targets)))]
        edges.append((v, u))
        targets += [u, v]
        if v > 2 and rng.random() < m_extra:
            w = targets[int(rng.integers(len(targets)))]
            if w != v and w != u:
                edges.append((v, w))
                targets += [w, v]
    return edges


def generate(config: SynthConfig):
    """Return ``(parties, reports, ground_truth)``; deterministic given the seed."""
    rng = np.random.default_rng(config.seed)
    lo, hi = config.group_size
    sizes = [int(rng.integers(lo, hi + 1)) for _ in range(config.n_groups)]
    if sum(sizes) > config.n_parties or (sizes and max(sizes) > config.n_parties):
        raise ValueError("injected groups need more parties than configured")
    n = config.n_parties
    ids = [f"P{i:07d}" for i in range(n)]
    order = rng.permutation(n)
    n_group = sum(sizes)
    group_idx = order[:n_group]
    rest = order[n_group:]

    # background split: one core component plus small components
    n_bg = rest.size
    mean_small = float(SMALL_SIZES @ SMALL_PROBS)
    n_small_comps = max(0, int(round(config.component_fraction * n)) - 1)
    small_total = min(n_bg - min(n_bg, 50), int(round(n_small_comps * mean_small)))
    core = rest[:n_bg - small_total]
    small = rest[n_bg - small_total:]

    parties: dict[int, Party] = {}
    for i in rest.tolist():
        parties[i] = _make_party(rng, ids[i])
    corpus = _Corpus(rng, config.start)
    sup_strong = 0

    # small components
    pos = 0
    while pos < small.size:
        s = int(rng.choice(SMALL_SIZES, p=SMALL_PROBS))
        comp = small[pos:pos + s].tolist()
        pos += s
        for p in comp:
            ccy = CURRENCY[parties[p].country]
            corpus.add(corpus.when(), Channel.CASH_DEPOSIT, [p], [p], _cash_amount(rng), ccy)
        for j in range(1, len(comp)):
            a, b = comp[j], comp[int(rng.integers(j))]
            if rng.random() < 0.5:
                a, b = b, a
            ccy = CURRENCY[parties[a].country]
            for _ in range(int(rng.integers(1, 3))):
                corpus.add(corpus.when(), Channel.INTERNATIONAL_TRANSFER, [a], [b], _transfer_amount(rng), ccy)
        if len(comp) >= 2 and rng.random() < 0.5:
            a, b = comp[0], comp[1]
            key = (EvidenceKind.SHARED_ACCOUNT, f"ACC-S{a}")
            corpus.add(corpus.when(), Channel.CASH_DEPOSIT, [a], [b], _cash_amount(rng),
                       CURRENCY[parties[a].country], [(a, key), (b, key)])
            sup_strong += 1

    # core network
    core_list = core.tolist()
    pa = _preferential_attachment(rng, len(core_list))
    budget = config.n_reports if config.n_reports is not None else 2 * len(core_list)
    for v, u in pa:
        a, b = core_list[v], core_list[u]
        if rng.random() < 0.5:
            a, b = b, a
        corpus.add(corpus.when(), Channel.INTERNATIONAL_TRANSFER, [a], [b], _transfer_amount(rng),
                   CURRENCY[parties[a].country])
    extra = max(0, budget - len(pa))
    for _ in range(extra):
        if rng.random() < 0.6 and pa:
            v, u = pa[int(rng.integers(len(pa)))]
            a, b = core_list[v], core_list[u]
            if rng.random() < 0.5:
                a, b = b, a
            corpus.add(corpus.when(), Channel.INTERNATIONAL_TRANSFER, [a], [b], _transfer_amount(rng),
                       CURRENCY[parties[a].country])
        elif core_list:
            a = core_list[int(rng.integers(len(core_list)))]
            corpus.add(corpus.when(), Channel.CASH_DEPOSIT, [a], [a], _cash_amount(rng),
                       CURRENCY[parties[a].country])
    # a few family accounts inside the core
    for _ in range(len(core_list) // 50):
        a, b = (core_list[int(rng.integers(len(core_list)))] for _ in range(2))
        if a != b:
            key = (EvidenceKind.SHARED_ACCOUNT, f"ACC-F{a}-{b}")
            corpus.add(corpus.when(), Channel.CASH_DEPOSIT, [a], [b], _cash_amount(rng),
                       CURRENCY[parties[a].country], [(a, key), (b, key)])
            sup_strong += 1

    # injected groups
    truth = GroundTruth()
    cursor = 0
    for g, s in enumerate(sizes):
        members = group_idx[cursor:cursor + s].tolist()
        cursor += s
        sup_strong += _inject(rng, corpus, parties, ids, members, core_list, g, config.start)
        grp = [r for r in corpus.reports if r[7] == g]
        tagged = [m for m in members if parties[m].tagged_suspicious]
        truth.groups.append(GroupTruth(f"G{g:03d}", sorted(ids[m] for m in members),
                                       sorted(ids[m] for m in tagged), []))
        for r in grp:
            r[7] = f"G{g:03d}"

    # weak shared agents over the core to approach the supplementary ratio
    n_tx = sum(len(r[2]) * len(r[3]) for r in corpus.reports)
    target = config.sup_ratio * n_tx
    have = sup_strong
    agent = 0
    by_party: dict[int, list[int]] = {}
    for ri, r in enumerate(corpus.reports):
        if r[7] is None:
            by_party.setdefault(r[2][0], []).append(ri)
    core_senders = [p for p in core_list if p in by_party]
    while have < target and len(core_senders) >= 11:
        m = int(rng.integers(11, 17))
        chosen = rng.choice(len(core_senders), size=m, replace=False)
        key = (EvidenceKind.SHARED_AGENT, f"AGT{agent:05d}")
        agent += 1
        for c in chosen.tolist():
            p = core_senders[c]
            reps = by_party[p]
            corpus.reports[reps[int(rng.integers(len(reps)))]][6].append((p, key))
        have += m * (m - 1) // 2

    # finalize: chronological report ids
    reps = sorted(range(len(corpus.reports)), key=lambda i: (corpus.reports[i][0], i))
    report_id = {}
    records = []
    for k, i in enumerate(reps):
        t, ch, snd, rcv, amt, ccy, assoc, grp = corpus.reports[i]
        rid = f"R{k:08d}"
        report_id[i] = rid
        records.append(ReportRecord(rid, ch, tuple(ids[p] for p in snd), tuple(ids[p] for p in rcv),
                                    amt, ccy, t, tuple((ids[p], EvidenceKey(kd, v)) for p, (kd, v) in assoc)))
    for gt in truth.groups:
        gt.report_ids = sorted(report_id[i] for i, r in enumerate(corpus.reports) if r[7] == gt.group_id)
    party_list = [parties[i] for i in range(n)]
    return party_list, records, truth


def _inject(rng, corpus, parties, ids, members, core_list, g, start):
    """Add one group's parties and reports; returns its supplementary pair count."""
    s = len(members)
    coord = members[0]
    n_mule = max(2, s // 3)
    n_inter = max(2, s // 3)
    mules = members[1:1 + n_mule]
    inter = members[1 + n_mule:1 + n_mule + n_inter]
    benef = members[1 + n_mule + n_inter:] or [coord]
    foreign = list(rng.permutation(FOREIGN))
    second_tag = rng.random() < 0.5
    for m in members:
        country = HOME
        if m in inter:
            country = str(foreign[inter.index(m) % max(2, min(len(foreign), len(inter)))])
        tagged = m == coord or (second_tag and m == mules[0])
        parties[m] = _make_party(rng, ids[m], country, tagged)
    t0 = start + int(rng.integers(0, YEAR - 6 * WEEK))
    # placement
    key = (EvidenceKind.SHARED_ACCOUNT, f"ACC-G{g:03d}")
    for mule in mules:
        for _ in range(int(rng.integers(2, 5))):
            corpus.add(t0 + int(rng.integers(0, 2 * WEEK)), Channel.CASH_DEPOSIT, [mule], [coord],
                       float(rng.uniform(9000, 9990)), "AUD", [(mule, key)], g)
    # layering burst
    t1 = t0 + 2 * WEEK
    hops = [coord] + inter
    for _ in range(int(rng.integers(3, 6)) * len(inter)):
        a, b = rng.choice(len(hops), size=2, replace=False)
        corpus.add(t1 + int(rng.integers(0, WEEK)), Channel.INTERNATIONAL_TRANSFER, [hops[a]], [hops[b]],
                   float(rng.uniform(5000, 40000)), CURRENCY[parties[hops[a]].country], None, g)
    for i in inter:
        corpus.add(t1 + int(rng.integers(0, WEEK)), Channel.INTERNATIONAL_TRANSFER, [coord], [i],
                   float(rng.uniform(5000, 40000)), "AUD", None, g)
    # integration
    t2 = t1 + WEEK
    for b in benef:
        for _ in range(int(rng.integers(1, 3))):
            i = inter[int(rng.integers(len(inter)))]
            corpus.add(t2 + int(rng.integers(0, 2 * WEEK)), Channel.INTERNATIONAL_TRANSFER, [i], [b],
                       float(rng.uniform(10000, 60000)), CURRENCY[parties[i].country], None, g)
    # ordinary activity tying members to the background
    if core_list:
        for m in members:
            for _ in range(int(rng.integers(1, 3)) if m != coord else 1):
                c = core_list[int(rng.integers(len(core_list)))]
                a, b = (m, c) if rng.random() < 0.5 else (c, m)
                corpus.add(corpus.when(), Channel.INTERNATIONAL_TRANSFER, [a], [b], _transfer_amount(rng),
                           CURRENCY[parties[a].country])
    return len(mules) * (len(mules) - 1) // 2


def write_ground_truth(path, truth: GroundTruth):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(truth.to_json(), fh, indent=2, sort_keys=True)


def read_ground_truth(path) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as fh:
        return GroundTruth.from_json(json.load(fh))


def write_corpus(path, parties, reports):
    write_reports(path, parties, reports)
