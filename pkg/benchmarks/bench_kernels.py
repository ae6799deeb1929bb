"""Time the numba and numpy kernel backends side by side.

Each backend runs in its own interpreter because the backend is chosen at
import time from ``LAUNDERGRAPH_DISABLE_JIT``.

    python3 benchmarks/bench_kernels.py [--parties 50000] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from laundergraph import kernels
from laundergraph.community import ExtractionParams
from laundergraph.ingest import build_graph
from laundergraph.synth import SynthConfig, generate

n_parties, repeat = int(sys.argv[1]), int(sys.argv[2])
parties, reports, _ = generate(SynthConfig(n_parties=n_parties, n_groups=10, seed=0))
g = build_graph(parties, reports)
rng = np.random.default_rng(0)
seeds = rng.choice(g.n_parties, min(5000, g.n_parties), replace=False).astype(np.int64)
p = ExtractionParams()
X = rng.normal(size=(2000, 30))
y = (X[:, 0] + rng.normal(size=2000) > 0).astype(np.int64)
w = np.ones(2000, dtype=np.int64)
idx = np.arange(2000)
order = np.arange(30, dtype=np.int64)
blob = np.frombuffer(rng.bytes(4_000_000), dtype=np.uint8)
Z = np.hstack([X, np.ones((2000, 1))])
ys = np.where(y == 1, 1.0, -1.0)
qii = np.einsum("ij,ij->i", Z, Z)

cases = {
    "expand_batch": lambda: kernels.expand_batch(g.tx_indptr, g.tx_indices, g.tx_degree, g.sup_indptr,
                                                 g.sup_indices, g.sup_adj_weight, seeds,
                                                 p.n_max_array, p.w_min_array),
    "component_labels": lambda: kernels.component_labels(g.n_parties, g.tx_src, g.tx_dst),
    "best_split": lambda: kernels.best_split(X, y, w, idx, order, 30, 1),
    "svm_cd_epoch": lambda: kernels.svm_cd_epoch(Z, ys, np.zeros(2000), np.zeros(31), qii, 1e-3,
                                                 np.arange(2000, dtype=np.int64)),
    "crc64": lambda: kernels.crc64(blob),
}
out = {"backend": kernels.BACKEND}
for name, fn in cases.items():
    fn()  # warm-up (JIT compile or cache load)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(disable_jit: bool, parties: int, repeat: int) -> dict:
    env = dict(os.environ)
    env["LAUNDERGRAPH_DISABLE_JIT"] = "1" if disable_jit else "0"
    res = subprocess.run([sys.executable, "-c", WORKER, str(parties), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--parties", type=int, default=50_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    t0 = time.perf_counter()
    jit = run(False, args.parties, args.repeat)
    ref = run(True, args.parties, args.repeat)
    print(f"{'kernel':<18} {jit['backend']:>10} {ref['backend']:>10} {'ratio':>8}")
    for name in (k for k in jit if k != "backend"):
        print(f"{name:<18} {jit[name] * 1e3:9.2f}ms {ref[name] * 1e3:9.2f}ms {ref[name] / jit[name]:7.1f}x")
    print(f"({args.parties} parties, best of {args.repeat}, {time.perf_counter() - t0:.0f}s total)")


if __name__ == "__main__":
    main()
