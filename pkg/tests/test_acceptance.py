"""Exit criteria. Each test records one PASS/FAIL line in the terminal summary."""

import time

import numpy as np
import pytest

from helpers import extraction_oracle, haar_oracle_bursts, pairwise_auc, random_graph, weight_oracle
from laundergraph.community import ExtractionParams, extract, extract_batch, jaccard, merge_overlapping, Community
from laundergraph.evaluation import (
    EvalConfig,
    LabelingConfig,
    assign_labels,
    build_dataset,
    f_beta,
    repeated_holdout,
    roc_auc,
)
from laundergraph.features import burst_detect, feature_matrix
from laundergraph.graph import evidence_weight
from laundergraph.ingest import build_graph
from laundergraph.learn import TrainConfig, load_model, save_model, score, train
from laundergraph.snapshot import load_snapshot, save_snapshot
from laundergraph.synth import SynthConfig, generate

pytestmark = pytest.mark.acceptance


@pytest.fixture
def criterion(record_property):
    def record(n, ok, detail):
        record_property("criterion", n)
        record_property("detail", detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return record


def test_c01_f_beta_reference_rows(criterion):
    rows = [(0.1, 0.98, 0.31, 0.96), (0.5, 0.90, 0.73, 0.86), (1.0, 0.82, 0.88, 0.85),
            (0.1, 0.93, 0.22, 0.90), (0.5, 0.83, 0.70, 0.80), (1.0, 0.74, 0.87, 0.80)]
    err = max(abs(f_beta(p, r, b) - F) for b, p, r, F in rows)
    criterion(1, err <= 0.005, f"max |F - printed| = {err:.4f} over 6 rows")


def test_c02_weight_formula_oracle(criterion):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10_000):
        d = int(rng.integers(1, 200))
        n_p = int(rng.integers(0, d + 1))
        n_q = int(rng.integers(0, d + 1))
        worst = max(worst, abs(evidence_weight(n_p, n_q, d) - weight_oracle(n_p, n_q, d)))
    dt = time.perf_counter() - t0
    criterion(2, worst <= 1e-12 and dt < 1.0, f"max error {worst:.1e}, {dt:.2f}s")


def test_c03_extraction_oracle(criterion):
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    cases = mismatches = 0
    for _ in range(200):
        n = int(rng.integers(5, 201))
        g = random_graph(rng, n, p_tx=float(rng.uniform(0.002, 0.04)), n_hubs=int(rng.integers(0, 4)),
                         hub_deg=int(rng.integers(5, 30)), n_keys=int(rng.integers(0, 20)))
        k = int(rng.integers(1, 5))
        params = ExtractionParams(k, rng.integers(1, 15, k).tolist(), rng.uniform(0, 0.6, k).tolist(),
                                  bool(rng.integers(2)))
        seed = g.party_ids[int(rng.integers(n))]
        cases += 1
        mismatches += set(extract(g, seed, params).member_ids) != extraction_oracle(g, seed, params)
    dt = time.perf_counter() - t0
    criterion(3, mismatches == 0 and dt < 30, f"{mismatches}/{cases} mismatches, {dt:.1f}s")


def test_c04_auc_oracle(criterion):
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 501))
        y = rng.integers(0, 2, n)
        y[0], y[1] = 0, 1
        s = np.round(rng.random(n), int(rng.integers(1, 4)))  # rounding creates ties
        worst = max(worst, abs(roc_auc(s, y)[1] - pairwise_auc(s.tolist(), y.tolist())))
    dt = time.perf_counter() - t0
    criterion(4, worst <= 1e-9 and dt < 5, f"max error {worst:.1e}, {dt:.2f}s")


def test_c05_monotonicity(criterion):
    rng = np.random.default_rng(5)
    graphs = [random_graph(rng, 60, p_tx=0.04, n_hubs=2, hub_deg=12, n_keys=15) for _ in range(20)]
    bad_w = bad_n = bad_e = 0
    for i in range(1000):
        g = graphs[i % len(graphs)]
        k = int(rng.integers(1, 4))
        n_max = rng.integers(1, 15, k)
        w_min = rng.uniform(0, 0.8, k)
        seed = g.party_ids[int(rng.integers(g.n_parties))]
        # the component rule is a separate, non-monotone acceleration; test the walk itself
        base = set(extract(g, seed, ExtractionParams(k, n_max.tolist(), w_min.tolist(), False)).member_ids)
        w_up = np.minimum(w_min + rng.uniform(0, 0.5, k), 1.0)
        bad_w += not set(extract(g, seed, ExtractionParams(k, n_max.tolist(), w_up.tolist(), False)).member_ids) <= base
        n_up = n_max + rng.integers(0, 10, k)
        bad_n += not base <= set(extract(g, seed, ExtractionParams(k, n_up.tolist(), w_min.tolist(), False)).member_ids)
        d = int(rng.integers(2, 100))
        n_p, n_q = int(rng.integers(0, d)), int(rng.integers(0, d + 1))
        if n_p + 1 <= d:
            bad_e += evidence_weight(n_p + 1, n_q, d) < evidence_weight(n_p, n_q, d)
        bad_e += evidence_weight(n_p, min(n_q + 1, d), d) < evidence_weight(n_p, n_q, d)
    total = bad_w + bad_n + bad_e
    criterion(5, total == 0, f"violations: w_min {bad_w}, n_max {bad_n}, weight {bad_e} (1000 cases each)")


def test_c06_merge_fixed_point(criterion):
    rng = np.random.default_rng(6)
    g = random_graph(rng, 40, n_keys=0)
    p = ExtractionParams()
    bad = 0
    for _ in range(500):
        comms = []
        for _ in range(int(rng.integers(1, 12))):
            m = np.unique(rng.choice(40, int(rng.integers(1, 10))))
            comms.append(Community(g, int(m[0]), m, p))
        theta = float(rng.uniform(0.05, 1.0))
        once = merge_overlapping(comms, theta)
        twice = merge_overlapping(once, theta)
        bad += [c.key for c in once] != [c.key for c in twice]
        bad += any(jaccard(a, b) >= theta for i, a in enumerate(once) for b in once[i + 1:])
    criterion(6, bad == 0, f"{bad} violations over 500 collections")


def _end_to_end(seed):
    parties, reports, truth = generate(SynthConfig(n_parties=20_000, n_groups=20, seed=seed))
    g = build_graph(parties, reports)
    pos, neg = assign_labels(g, truth.tagged_parties, LabelingConfig(negative_sample=2000, seed=seed))
    ds = build_dataset(g, pos, neg, ExtractionParams())
    summary = repeated_holdout(ds, {"rf": TrainConfig(n_trees=100, seed=seed)}, EvalConfig(folds=10, seed=seed))
    rep = summary.mean["rf"]
    return rep.auc, rep.per_beta[0.1]["precision"]


@pytest.mark.slow
def test_c07_end_to_end_synthetic(criterion):
    t0 = time.perf_counter()
    results = [_end_to_end(s) for s in (0, 1, 2)]
    ok = sum(auc >= 0.85 and prec >= 0.90 for auc, prec in results)
    dt = time.perf_counter() - t0
    detail = "; ".join(f"seed {i}: AUC {a:.3f} P@0.1 {p:.3f}" for i, (a, p) in enumerate(results))
    criterion(7, ok >= 2 and dt < 300, f"{ok}/3 seeds pass ({detail}), {dt:.0f}s")


@pytest.mark.slow
def test_c08_parallel_equivalence(criterion):
    parties, reports, _ = generate(SynthConfig(n_parties=100_000, n_groups=20, seed=8))
    g = build_graph(parties, reports)
    rng = np.random.default_rng(8)
    seeds = [g.party_ids[i] for i in rng.choice(g.n_parties, 10_000, replace=False)]
    params = ExtractionParams()
    extract_batch(g, seeds[:50], params)  # warm JIT and component caches

    def timed(workers):
        best, out = float("inf"), None
        for _ in range(3):
            t0 = time.perf_counter()
            out = extract_batch(g, seeds, params, workers=workers)
            best = min(best, time.perf_counter() - t0)
        return best, out

    t1, one = timed(1)
    t8, eight = timed(8)
    same = [c.key for c in one] == [c.key for c in eight] and [c.seed for c in one] == [c.seed for c in eight]
    speedup = t1 / t8
    import os
    criterion(8, same and speedup >= 2.0,
              f"identical={same}, 1 worker {t1:.2f}s, 8 workers {t8:.2f}s, speedup {speedup:.2f}x "
              f"on {os.cpu_count()} cpu(s)")


def test_c09_roundtrips(criterion, tmp_path):
    rng = np.random.default_rng(9)
    parties, reports, truth = generate(SynthConfig(n_parties=3000, n_groups=4, seed=9))
    g = build_graph(parties, reports)
    save_snapshot(g, tmp_path / "g.lgs")
    h = load_snapshot(tmp_path / "g.lgs")
    probes = [g.party_ids[i] for i in rng.choice(g.n_parties, 100, replace=False)]
    Xg = feature_matrix([extract(g, p) for p in probes])
    Xh = feature_matrix([extract(h, p) for p in probes])
    snap_err = float(np.max(np.abs(Xg - Xh)))
    y = (rng.random(300) < 0.3).astype(int)
    X = rng.normal(size=(300, Xg.shape[1])) + y[:, None]
    T = rng.normal(size=(100, Xg.shape[1]))
    model_err = 0.0
    for kind in ("rf", "svm"):
        m = train(X, y, TrainConfig(model=kind, n_trees=50), "h", "1")
        save_model(m, tmp_path / f"{kind}.lgm")
        model_err = max(model_err, float(np.max(np.abs(score(m, T) - score(load_model(tmp_path / f"{kind}.lgm"), T)))))
    criterion(9, snap_err <= 1e-12 and model_err <= 1e-12,
              f"snapshot feature error {snap_err:.1e}, model score error {model_err:.1e} (100 probes each)")


def test_c10_burst_sanity(criterion):
    rng = np.random.default_rng(10)
    flat_bad = sum(len(burst_detect([int(v)] * int(n))) != 0
                   for v, n in zip(rng.integers(0, 50, 100), rng.integers(2, 200, 100)))
    spike_bad = 0
    for _ in range(100):
        n = int(rng.integers(16, 257))
        base = int(rng.integers(0, 6))
        x = np.full(n, base)
        i = int(rng.integers(0, n - 2))
        j = int(rng.integers(i + 2, n))
        h = int(rng.integers(20, 60))
        x[i] += h
        x[j] += h + int(rng.integers(0, h // 4 + 1))
        got = burst_detect(x)
        want = haar_oracle_bursts(x.tolist(), 2.0)
        spike_bad += not (len(got) == 2 and [(a, b) for a, b, _ in got] == [(i, i), (j, j)]
                          and [(a, b) for a, b, _ in want] == [(i, i), (j, j)])
    criterion(10, flat_bad == 0 and spike_bad == 0,
              f"constant series with bursts: {flat_bad}/100, two-spike mismatches: {spike_bad}/100")
