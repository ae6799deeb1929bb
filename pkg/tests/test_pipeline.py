import json

import numpy as np
import pytest

from helpers import constant_forest, graph_from, report
from laundergraph.cli import main
from laundergraph.community import ExtractionParams
from laundergraph.features import DEFAULT_SCHEMA
from laundergraph.learn import SchemaMismatchError
from laundergraph.pipeline import Alert, Monitor, MonitorStats, PipelineConfig, monitor


def path5():
    return graph_from([("a", "b"), ("b", "c"), ("c", "d"), ("d", "e")])


P2 = ExtractionParams(2, 40, 0.01)


# ---- config


def test_config_unknown_key():
    with pytest.raises(ValueError, match="unknown config keys"):
        PipelineConfig.from_dict({"kk": 3})


def test_config_file_and_overrides(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"k": 2, "n_max": [5, 6], "tau": 0.7}))
    cfg = PipelineConfig.from_file(p, tau=0.9, theta=None)
    assert cfg.tau == 0.9 and cfg.theta == 0.5
    assert cfg.extraction_params() == ExtractionParams(2, (5, 6), 0.01)
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("kw", [dict(theta=0.0), dict(tau=1.5), dict(window_size=0), dict(k=0)])
def test_config_invalid(kw):
    with pytest.raises(ValueError):
        PipelineConfig(**kw)


# ---- monitor


def test_alert_when_votes_reach_tau():
    g = path5()
    model = constant_forest(100, 95, len(DEFAULT_SCHEMA))
    alerts = list(monitor(g, model, 0.93, [report("n1", ["a"], ["b"], t=100)], params=P2))
    assert len(alerts) == 1
    a = alerts[0]
    assert a.score == pytest.approx(0.95) and a.lineage == ("a",) and a.reports == ("n1",)


def test_no_alert_below_tau():
    g = path5()
    model = constant_forest(100, 10, len(DEFAULT_SCHEMA))
    stats = MonitorStats()
    alerts = list(monitor(g, model, 0.93, [report("n1", ["a"], ["b"], t=100)], params=P2, stats=stats))
    assert alerts == [] and stats.processed == 1 and stats.suspicious == 0


def test_overlapping_communities_merge():
    g = path5()
    model = constant_forest(100, 95, len(DEFAULT_SCHEMA))
    stream = [report("n1", ["b"], ["c"], t=100), report("n2", ["d"], ["c"], t=200)]
    alerts = list(monitor(g, model, 0.93, stream, theta=0.5, params=P2))
    assert len(alerts) == 1
    a = alerts[0]
    assert a.lineage == ("b", "d") and sorted(a.community.member_ids) == list("abcde")
    assert a.reports == ("n1", "n2")
    # a stricter merge threshold keeps them apart
    alerts = list(monitor(g, model, 0.93, stream, theta=0.7, params=P2))
    assert len(alerts) == 2


def test_window_size_flushes_early():
    g = path5()
    model = constant_forest(10, 10, len(DEFAULT_SCHEMA))
    mon = Monitor(g, model, 0.5, P2, window_size=1)
    out = mon.process(report("n1", ["a"], ["b"], t=1))
    assert len(out) == 1 and mon.pending == []


def test_window_seconds_flushes_on_later_report():
    g = path5()
    model = constant_forest(10, 10, len(DEFAULT_SCHEMA))
    mon = Monitor(g, model, 0.5, P2, window_seconds=50)
    assert mon.process(report("n1", ["a"], ["b"], t=0)) == []
    assert mon.process(report("n2", ["a"], ["b"], t=10)) == []
    out = mon.process(report("n3", ["e"], ["d"], t=60))
    assert len(out) == 1 and out[0].lineage == ("a",)
    assert len(mon.flush()) == 1


def test_unknown_sender_skipped():
    g = path5()
    model = constant_forest(10, 10, len(DEFAULT_SCHEMA))
    stats = MonitorStats()
    alerts = list(monitor(g, model, 0.5, [report("bad", ["zz"], ["a"], t=0)], params=P2, stats=stats))
    assert alerts == [] and stats.skipped and stats.skipped[0][0] == "bad"


def test_monitor_rejects_schema_mismatch():
    model = constant_forest(10, 10, len(DEFAULT_SCHEMA))
    model.schema_hash = "deadbeefdeadbeef"
    with pytest.raises(SchemaMismatchError):
        Monitor(path5(), model, 0.5)


def test_monitor_replay_deterministic():
    g = path5()
    model = constant_forest(100, 60, len(DEFAULT_SCHEMA))
    stream = [report(f"n{i}", [s], [r], t=i * 1000) for i, (s, r) in enumerate(["ab", "cd", "ed", "ba"])]
    runs = [[a.to_json() for a in monitor(g, model, 0.5, stream, window_size=2, params=P2)] for _ in range(2)]
    assert runs[0] == runs[1] and runs[0]


def test_alert_invariants():
    g = path5()
    from laundergraph.community import extract
    c = extract(g, "a", P2)
    with pytest.raises(ValueError):
        Alert(c, 0.2, 0.5, "m", ("a",), 0)
    with pytest.raises(ValueError):
        Alert(c, 0.7, 0.5, "m", (), 0)


# ---- CLI


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--n-parties", "1500", "--groups", "4", "--seed", "3", "--out", str(d / "corpus")]) == 0
    assert main(["build", str(d / "corpus" / "reports.jsonl"), "--out", str(d / "snap.lgs")]) == 0
    return d


def test_cli_featurize_train_score(workspace, capsys):
    d = workspace
    cfg = d / "cfg.json"
    cfg.write_text(json.dumps({"negative_sample": 100, "n_trees": 20}))
    assert main(["featurize", "--snapshot", str(d / "snap.lgs"), "--truth", str(d / "corpus" / "truth.json"),
                 "--config", str(cfg), "--out", str(d / "f.csv")]) == 0
    assert main(["train", "--features", str(d / "f.csv"), "--config", str(cfg),
                 "--model", str(d / "m.lgm")]) == 0
    capsys.readouterr()
    assert main(["score", "--snapshot", str(d / "snap.lgs"), "--model", str(d / "m.lgm"),
                 "--seeds", "P0000001,P0000002"]) == 0
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert lines and all(0 <= x["score"] <= 1 for x in lines)


def test_cli_extract_partial_on_unknown_seed(workspace):
    d = workspace
    code = main(["extract", "--snapshot", str(d / "snap.lgs"), "--seeds", "P0000001,NOPE",
                 "--out", str(d / "c.jsonl")])
    assert code == 2
    assert (d / "c.jsonl").read_text().strip()


def test_cli_fatal_on_missing_snapshot(workspace):
    assert main(["extract", "--snapshot", str(workspace / "missing.lgs"), "--seeds", "a",
                 "--out", str(workspace / "x.jsonl")]) == 1


def test_cli_build_partial_on_bad_line(tmp_path):
    p = tmp_path / "r.jsonl"
    p.write_text(json.dumps({"id": "a", "country": "AU"}) + "\n" + json.dumps({"report_id": "r1", "channel": "cash_deposit", "senders": ["a"],
                             "receivers": ["a"], "amount": 5, "currency": "AUD", "timestamp": 0})
                 + "\n{not json\n")
    assert main(["build", str(p), "--out", str(tmp_path / "s.lgs")]) == 2


def test_cli_monitor(workspace):
    d = workspace
    if not (d / "m.lgm").exists():
        pytest.skip("model from the featurize/train test is required")
    code = main(["monitor", "--snapshot", str(d / "snap.lgs"), "--model", str(d / "m.lgm"),
                 "--stream", str(d / "corpus" / "reports.jsonl"), "--tau", "0.5",
                 "--out", str(d / "alerts.jsonl")])
    assert code in (0, 2)
    for line in (d / "alerts.jsonl").read_text().splitlines():
        a = json.loads(line)
        assert a["score"] >= 0.5 and a["lineage"]
