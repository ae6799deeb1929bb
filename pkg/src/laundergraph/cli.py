"""Command line interface: synthesize, build, extract, featurize, train, evaluate, score, monitor."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .community import extract_batch, read_communities, write_communities
from .evaluation import assign_labels, build_dataset, repeated_holdout, write_eval_report, Dataset
from .features import DEFAULT_SCHEMA, feature_matrix, read_feature_csv, write_feature_csv
from .ingest import ingest, parse_reports
from .learn import load_model, save_model, score, train
from .pipeline import MonitorStats, PipelineConfig, monitor
from .snapshot import load_snapshot, save_snapshot
from .synth import SynthConfig, generate, read_ground_truth, write_corpus, write_ground_truth

log = logging.getLogger("laundergraph")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _vector(text, cast):
    parts = [cast(p) for p in str(text).split(",") if p.strip()]
    return parts[0] if len(parts) == 1 else parts


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with PipelineConfig keys")
    p.add_argument("--k", type=int)
    p.add_argument("--n-max", type=lambda s: _vector(s, int), help="scalar or comma-separated per-step vector")
    p.add_argument("--w-min", type=lambda s: _vector(s, float), help="scalar or comma-separated per-step vector")
    p.add_argument("--theta", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--model", dest="model_path", help="model file")
    p.add_argument("--out")


def _config(args) -> PipelineConfig:
    overrides = dict(k=args.k, n_max=args.n_max, w_min=args.w_min, theta=args.theta, tau=args.tau,
                     beta=args.beta, seed=args.seed, workers=args.workers, model_path=args.model_path,
                     out=args.out)
    if getattr(args, "kind", None):
        overrides["model"] = args.kind
    if args.config:
        return PipelineConfig.from_file(args.config, **overrides)
    return PipelineConfig.from_dict({}, **overrides)


def _need(value, what):
    if not value:
        raise SystemExit(f"laundergraph: {what} is required")
    return value


def _graph(args, cfg):
    if args.snapshot or cfg.snapshot:
        return load_snapshot(args.snapshot or cfg.snapshot)
    graph, errors = ingest(_need(cfg.reports, "--snapshot or reports"))
    return graph


# --------------------------------------------------------------------------


def cmd_synth(args, cfg):
    out = Path(_need(cfg.out, "--out"))
    out.mkdir(parents=True, exist_ok=True)
    parties, reports, truth = generate(SynthConfig(n_parties=args.n_parties, n_groups=args.groups,
                                                   seed=cfg.seed))
    write_corpus(out / "reports.jsonl", parties, reports)
    write_ground_truth(out / "truth.json", truth)
    print(f"{len(parties)} parties, {len(reports)} reports, {len(truth)} groups -> {out}")
    return EXIT_OK


def cmd_build(args, cfg):
    paths = args.reports or cfg.reports
    graph, errors = ingest(_need(paths, "report files"))
    save_snapshot(graph, _need(cfg.out, "--out"), source_files=[str(p) for p in paths])
    print(json.dumps(graph.summary()))
    for lineno, msg in errors.lines:
        print(f"skipped line {lineno}: {msg}", file=sys.stderr)
    return EXIT_PARTIAL if errors.lines else EXIT_OK


def _seeds(args, graph):
    if args.seeds:
        return [s for s in args.seeds.split(",") if s]
    if args.seed_file:
        return [line.strip() for line in open(args.seed_file, encoding="utf-8") if line.strip()]
    return graph.tagged_parties()


def cmd_extract(args, cfg):
    graph = _graph(args, cfg)
    errors = []
    comms = extract_batch(graph, _seeds(args, graph), cfg.extraction_params(), cfg.workers, errors=errors)
    write_communities(_need(cfg.out, "--out"), comms)
    print(f"{len(comms)} communities")
    for seed, msg in errors:
        print(f"seed {seed}: {msg}", file=sys.stderr)
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_featurize(args, cfg):
    graph = _graph(args, cfg)
    out = _need(cfg.out, "--out")
    if args.communities:
        comms = read_communities(args.communities, graph)
        X = feature_matrix(comms, DEFAULT_SCHEMA, cfg.bin_width, cfg.c)
        write_feature_csv(out, X, seeds=[c.seed_id for c in comms])
    else:
        truth_path = args.truth or cfg.ground_truth
        tagged = read_ground_truth(truth_path).tagged_parties if truth_path else graph.tagged_parties()
        pos, neg = assign_labels(graph, tagged, cfg.labeling_config(), w_min=min(np.atleast_1d(cfg.w_min)))
        ds = build_dataset(graph, pos, neg, cfg.extraction_params(), workers=cfg.workers,
                           bin_width=cfg.bin_width, c=cfg.c)
        write_feature_csv(out, ds.X, seeds=ds.seeds, labels=ds.y)
        print(f"{ds.n_positive} positive, {ds.n_negative} negative communities")
    return EXIT_OK


def _labelled(path):
    X, seeds, y = read_feature_csv(path)
    if y is None:
        raise SystemExit("laundergraph: feature file has no label column")
    return X, seeds, y


def cmd_train(args, cfg):
    X, _, y = _labelled(args.features)
    model = train(X, y, cfg.train_config(), DEFAULT_SCHEMA.hash, DEFAULT_SCHEMA.version)
    save_model(model, _need(cfg.model_path or cfg.out, "--model"))
    print(f"trained {model.kind} on {len(y)} rows")
    return EXIT_OK


def cmd_evaluate(args, cfg):
    X, seeds, y = _labelled(args.features)
    ds = Dataset(X, y, seeds or [])
    kinds = args.models.split(",")
    summary = repeated_holdout(ds, {k: cfg.train_config(k) for k in kinds}, cfg.eval_config())
    print(summary.format())
    if cfg.out:
        write_eval_report(summary, cfg.out)
    return EXIT_OK


def cmd_score(args, cfg):
    graph = _graph(args, cfg)
    model = load_model(_need(cfg.model_path, "--model"), DEFAULT_SCHEMA.hash)
    if args.communities:
        comms = read_communities(args.communities, graph)
    else:
        comms = extract_batch(graph, _seeds(args, graph), cfg.extraction_params(), cfg.workers)
    values = score(model, feature_matrix(comms, DEFAULT_SCHEMA, cfg.bin_width, cfg.c))
    lines = [json.dumps({"seed": c.seed_id, "score": float(v), "suspicious": bool(v >= cfg.tau)})
             for c, v in zip(comms, values)]
    if cfg.out:
        Path(cfg.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    else:
        print("\n".join(lines))
    return EXIT_OK


def cmd_monitor(args, cfg):
    graph = _graph(args, cfg)
    model_path = _need(cfg.model_path, "--model")
    model = load_model(model_path, DEFAULT_SCHEMA.hash)
    parties, reports, errors = parse_reports(_need(args.stream, "--stream"))
    graph = graph.extended(parties=[p for p in parties if p.id not in graph])
    stats = MonitorStats()
    sink = open(cfg.out, "w", encoding="utf-8") if cfg.out else sys.stdout
    try:
        for alert in monitor(graph, model, cfg.tau, reports, cfg.window_size, cfg.window_seconds,
                             cfg.theta, cfg.extraction_params(), stats=stats, bin_width=cfg.bin_width,
                             c=cfg.c, model_id=Path(model_path).name):
            sink.write(json.dumps(alert.to_json()) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    print(f"{stats.processed} reports, {stats.suspicious} suspicious, {stats.alerts} alerts, "
          f"{len(stats.skipped)} skipped", file=sys.stderr)
    return EXIT_PARTIAL if (stats.skipped or errors.lines) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laundergraph", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus and ground truth")
    _common(p)
    p.add_argument("--n-parties", type=int, default=10000)
    p.add_argument("--groups", type=int, default=5)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("build", help="ingest report files into a snapshot")
    _common(p)
    p.add_argument("reports", nargs="*")
    p.set_defaults(func=cmd_build)

    for name, func, helptext in (("extract", cmd_extract, "extract communities for seeds"),
                                 ("featurize", cmd_featurize, "write a feature matrix"),
                                 ("score", cmd_score, "score communities with a trained model"),
                                 ("monitor", cmd_monitor, "stream reports and emit alerts")):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        p.add_argument("--snapshot")
        p.add_argument("--seeds", help="comma-separated party ids")
        p.add_argument("--seed-file")
        p.add_argument("--communities", help="community JSONL file")
        p.add_argument("--truth", help="ground-truth JSON (featurize)")
        p.add_argument("--stream", help="report JSONL to replay (monitor)")
        p.set_defaults(func=func)

    p = sub.add_parser("train", help="train a model from a labelled feature file")
    _common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--kind", choices=("rf", "svm"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="repeated balanced holdout")
    _common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--models", default="rf,svm")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        return args.func(args, cfg)
    except SystemExit:
        raise
    except Exception as exc:  # fatal: report and exit 1
        print(f"laundergraph: error: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
