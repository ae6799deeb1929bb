import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import CASH, TRANSFER, graph_from, haar_oracle_bursts, random_graph, report
from laundergraph.community import Community, ExtractionParams, community_adjacency, extract_batch
from laundergraph.features import (
    DAY,
    DEFAULT_SCHEMA,
    BinnedSeries,
    FeatureSchema,
    FeatureSpec,
    SchemaMismatchError,
    burst_detect,
    demographic_features,
    dynamic_features,
    feature_matrix,
    featurize,
    haar_details,
    high_amount_count,
    network_features,
    read_feature_csv,
    transaction_features,
    transitivity,
    write_feature_csv,
)
from laundergraph.graph import GraphBuilder, Party, PartyKind


def whole(g, params=ExtractionParams()):
    return Community(g, 0, np.arange(g.n_parties), params)


def build(parties, reports):
    b = GraphBuilder(parties)
    for r in reports:
        b.add_transaction(r)
    return b.freeze()


# ---- schema


def test_schema_blocks_and_order():
    assert len(DEFAULT_SCHEMA) == 30
    names = DEFAULT_SCHEMA.names
    blocks = [DEFAULT_SCHEMA.block(c) for c in ("demographic", "network", "transaction", "dynamic")]
    assert sum(blocks, []) == names
    assert len(set(names)) == len(names)


def test_schema_hash_changes_with_content():
    other = FeatureSchema(DEFAULT_SCHEMA.features[:-1] + (FeatureSpec("extra", "dynamic"),))
    assert other.hash != DEFAULT_SCHEMA.hash
    assert len(DEFAULT_SCHEMA.hash) == 16


def test_featurize_rejects_other_schema():
    g = graph_from([("a", "b")])
    other = FeatureSchema(DEFAULT_SCHEMA.features, version="2")
    with pytest.raises(SchemaMismatchError):
        featurize(whole(g), other)


# ---- demographic


def test_age_examples():
    parties = [Party("a", "AU", 30), Party("b", "AU", 50), Party("c", "NZ", None)]
    g = build(parties, [report("r", ["a"], ["b"]), report("s", ["b"], ["c"])])
    d = demographic_features(whole(g))
    assert (d["age_mean"], d["age_min"], d["age_max"]) == (40.0, 30.0, 50.0)
    assert d["n_countries"] == 2 and d["modal_country_frac"] == pytest.approx(2 / 3)


def test_missing_ages_use_sentinel():
    g = build([Party("a", "AU"), Party("b", "AU")], [report("r", ["a"], ["b"])])
    d = demographic_features(whole(g))
    assert d["age_mean"] == d["age_min"] == d["age_max"] == -1.0


def test_business_fraction():
    parties = [Party("a", "AU", party_kind=PartyKind.BUSINESS)] + [Party(x, "AU") for x in "bcd"]
    g = build(parties, [report("r", ["a"], list("bcd"))])
    assert demographic_features(whole(g))["frac_business"] == 0.25


# ---- network


def test_triangle_and_star_transitivity():
    tri = graph_from([("a", "b"), ("b", "c"), ("c", "a")])
    star = graph_from([("h", x) for x in "abcd"])
    assert transitivity(community_adjacency(whole(tri))) == pytest.approx(1.0)
    assert transitivity(community_adjacency(whole(star))) == 0.0
    nf = network_features(whole(tri))
    assert nf["density"] == 1.0 and nf["diameter"] == 1.0 and nf["degree_max"] == 2.0


def triple_oracle(nodes, edges):
    adj = {v: set() for v in nodes}
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    closed = triples = 0
    for v in nodes:
        for x, y in itertools.combinations(sorted(adj[v]), 2):
            triples += 1
            closed += y in adj[x]
    return closed / triples if triples else 0.0


@pytest.mark.parametrize("seed", range(8))
def test_transitivity_matches_triple_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 40, p_tx=0.12)
    for c in extract_batch(g, g.party_ids[:8], ExtractionParams(2, 20, 0.05, False)):
        adj = community_adjacency(c).tocoo()
        want = triple_oracle(range(c.size), zip(adj.row.tolist(), adj.col.tolist()))
        assert transitivity(community_adjacency(c)) == pytest.approx(want)


def test_multi_edges_counted_raw_but_not_in_degree():
    g = graph_from([("a", "b"), ("a", "b"), ("b", "a")])
    nf = network_features(whole(g))
    assert nf["n_tx_edges"] == 3 and nf["degree_max"] == 1


# ---- transaction


def test_cash_and_transfer_totals():
    parties = [Party("a", "AU"), Party("b", "NZ")]
    g = build(parties, [report("r1", ["a"], ["a"], 100, channel=CASH),
                        report("r2", ["a"], ["a"], 300, channel=CASH),
                        report("r3", ["a"], ["b"], 50, channel=TRANSFER, currency="NZD")])
    tf = transaction_features(whole(g))
    assert tf["cash_total"] == 400 and tf["cash_mean"] == 200
    assert tf["transfer_total"] == 50 and tf["transfer_mean"] == 50
    assert tf["n_currencies"] == 2 and tf["n_self_loops"] == 2
    assert tf["cross_border_frac"] == pytest.approx(1 / 3)
    assert tf["amount_max"] == 300


# ---- bursts


def test_burst_example():
    assert burst_detect([1, 1, 1, 9, 1, 1, 1, 1]) == [(3, 3, 4.5)]


def test_flat_series_has_no_burst():
    assert burst_detect([5] * 16) == []
    assert burst_detect([0, 0, 0, 0]) == []


def test_burst_needs_two_bins():
    with pytest.raises(ValueError):
        burst_detect([3])


def test_haar_is_orthonormal():
    rng = np.random.default_rng(0)
    x = rng.normal(size=32)
    details = haar_details(x)
    energy = sum(float(np.square(d).sum()) for d in details) + x.sum() ** 2 / x.size
    assert energy == pytest.approx(float(np.square(x).sum()))


@settings(max_examples=150)
@given(st.lists(st.integers(0, 30), min_size=2, max_size=40), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_bursts_match_oracle(counts, c):
    got = burst_detect(counts, c)
    want = haar_oracle_bursts(counts, c)
    assert [(a, b) for a, b, _ in got] == [(a, b) for a, b, _ in want]
    assert [x for _, _, x in got] == pytest.approx([x for _, _, x in want])


@settings(max_examples=100)
@given(st.lists(st.integers(0, 30), min_size=2, max_size=40))
def test_burst_intervals_disjoint_and_above_mean(counts):
    bursts = burst_detect(counts)
    mean = np.mean(counts)
    prev = -2
    for s, e, inten in bursts:
        assert prev + 1 < s <= e < len(counts)
        assert all(counts[i] > mean for i in range(s, e + 1))
        assert inten == pytest.approx(max(counts[s:e + 1]) / mean)
        prev = e


def test_binned_series():
    s = BinnedSeries.from_events([0, 10, DAY, 3 * DAY + 5], [1, 2, 3, 4])
    assert s.counts.tolist() == [2, 1, 0, 1]
    assert s.amounts.tolist() == [3, 3, 0, 4]


# ---- high amounts


def test_high_amount_example_at_threshold():
    # 100 equals mean + 2 std exactly, so it is not strictly above
    assert high_amount_count([10, 10, 10, 10, 100]) == 0


def test_high_amount_clear_outlier():
    assert high_amount_count([10] * 20 + [1000]) == 1


def test_high_amount_small_inputs():
    assert high_amount_count([]) == 0 and high_amount_count([5]) == 0 and high_amount_count([5, 5]) == 0


# ---- dynamic


def test_single_transaction():
    g = graph_from([("a", "b")])
    d = dynamic_features(whole(g))
    assert d == {"n_bursts": 0.0, "burst_intensity_max": 0.0, "burst_tx_frac": 0.0,
                 "n_high_amounts": 0.0, "n_active_days": 1.0, "gap_mean": -1.0}


def test_same_timestamp_one_active_day():
    g = build([Party("a", "AU"), Party("b", "AU")],
              [report(f"r{i}", ["a"], ["b"], t=1000) for i in range(5)])
    d = dynamic_features(whole(g))
    assert d["n_active_days"] == 1 and d["gap_mean"] == 0


def test_dynamic_burst_fraction():
    days = [0, 1, 2, 3, 4, 5, 6, 7] + [3] * 8
    g = build([Party("a", "AU"), Party("b", "AU")],
              [report(f"r{i}", ["a"], ["b"], t=d * DAY) for i, d in enumerate(days)])
    d = dynamic_features(whole(g))
    assert d["n_bursts"] == 1 and d["burst_tx_frac"] == pytest.approx(9 / 16)
    assert d["burst_intensity_max"] == pytest.approx(9 / 2)


# ---- featurize


def test_featurize_concatenates_blocks():
    rng = np.random.default_rng(2)
    g = random_graph(rng, 40)
    c = extract_batch(g, g.party_ids[:1])[0]
    v = featurize(c).as_dict()
    merged = {**demographic_features(c), **network_features(c), **transaction_features(c),
              **dynamic_features(c)}
    assert v == merged
    assert list(v) == DEFAULT_SCHEMA.names


def test_featurize_deterministic_and_finite():
    rng = np.random.default_rng(4)
    g = random_graph(rng, 60)
    comms = extract_batch(g, g.party_ids)
    X1 = feature_matrix(comms)
    X2 = feature_matrix(comms)
    assert np.array_equal(X1, X2) and np.all(np.isfinite(X1))
    assert X1.shape == (len(comms), 30)


def test_feature_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    X = rng.normal(size=(7, 30))
    seeds = [f"s{i}" for i in range(7)]
    labels = [0, 1, 0, 1, 1, 0, 0]
    path = tmp_path / "f.csv"
    write_feature_csv(path, X, seeds=seeds, labels=labels)
    X2, s2, y2 = read_feature_csv(path)
    assert np.array_equal(X, X2) and s2 == seeds and y2.tolist() == labels
    write_feature_csv(path, X)
    X3, s3, y3 = read_feature_csv(path)
    assert np.array_equal(X, X3) and s3 is None and y3 is None


def test_feature_csv_column_mismatch(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("seed,a,b\nx,1,2\n")
    with pytest.raises(SchemaMismatchError):
        read_feature_csv(path)


def test_equal_coefficients_are_not_significant():
    # both level-2 details are 0.5 in exact arithmetic; round-off must not split them
    assert burst_detect([2, 17, 0, 20, 1], 1.0) == [(3, 3, 2.5)]
