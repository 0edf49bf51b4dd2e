"""Compare the numba kernels with their numpy twins.

Kernel timings call ``<name>_numba`` and ``<name>_numpy`` directly in one
process. End-to-end CCE timings run in subprocesses, one with the default
backend and one with ``CCEVAL_DISABLE_NUMBA=1``, so the switch is exercised
the way users flip it.

    python benchmarks/bench_kernels.py --lengths 10000,100000,1000000
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from cceval import _kernels
from cceval.asgm import AsgmSpec, SynthDatasetSpec, generate_labels, generate_scores


def make_data(n, seed=0):
    segments = max(1, n // 500)
    labels = generate_labels(SynthDatasetSpec(n, segments, 40, 60, "L", seed=seed))
    scores = generate_scores(AsgmSpec("AccQ", 0.7, sigma=0.05), labels, "bench")
    return np.clip(scores, 0.0, 1.0), labels


def kernel_cases(scores, labels):
    starts, ends, _ = _kernels.run_boundaries_numpy(labels)
    means, m2 = _kernels.segment_moments_numpy(scores, starts, ends)
    pred = scores >= 0.5
    return {
        "minmax_normalize": (scores,),
        "run_boundaries": (labels,),
        "segment_moments": (scores, starts, ends),
        "class_moments": (scores, labels),
        "beta_uncertainty": (means, m2),
        "point_adjust": (pred, labels),
    }


def best_of(func, args, repeat):
    func(*args)  # compile / warm caches
    return min(timeit.repeat(lambda: func(*args), number=1, repeat=repeat))


def bench_kernels(lengths, repeat):
    rows = []
    for n in lengths:
        scores, labels = make_data(n)
        for name, args in kernel_cases(scores, labels).items():
            row = {"kernel": name, "n": n}
            for backend in ("numpy", "numba"):
                if backend == "numba" and not _kernels.NUMBA_AVAILABLE:
                    continue
                row[f"{backend}_ms"] = 1e3 * best_of(getattr(_kernels, f"{name}_{backend}"), args, repeat)
            rows.append(row)
    return rows


_CHILD = """
import json, sys, timeit
sys.path[:0] = {path!r}
from cceval import BACKEND, cce
from benchmarks.bench_kernels import make_data
out = {{}}
for n in {lengths!r}:
    s, y = make_data(n)
    cce(s, y)
    out[n] = 1e3 * min(timeit.repeat(lambda: cce(s, y), number=1, repeat={repeat}))
print(json.dumps({{"backend": BACKEND, "ms": out}}))
"""


def bench_end_to_end(lengths, repeat):
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    code = _CHILD.format(path=[here], lengths=list(lengths), repeat=repeat)
    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, CCEVAL_DISABLE_NUMBA=flag)
        proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        res = json.loads(proc.stdout.strip().splitlines()[-1])
        results[res["backend"]] = {int(k): v for k, v in res["ms"].items()}
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lengths", default="10000,100000,1000000")
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args(argv)
    lengths = [int(x) for x in args.lengths.split(",")]

    kernels = bench_kernels(lengths, args.repeat)
    print(f"{'kernel':<18} {'n':>9} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for r in kernels:
        nb = r.get("numba_ms")
        speed = f"{r['numpy_ms'] / nb:8.1f}" if nb else "     n/a"
        nb_s = f"{nb:10.3f}" if nb else "       n/a"
        print(f"{r['kernel']:<18} {r['n']:>9} {r['numpy_ms']:10.3f} {nb_s} {speed}")

    e2e = bench_end_to_end(lengths, args.repeat)
    print(f"\n{'cce end to end':<18} {'n':>9} " + " ".join(f"{b + ' ms':>10}" for b in e2e))
    for n in lengths:
        print(f"{'':<18} {n:>9} " + " ".join(f"{e2e[b][n]:10.3f}" for b in e2e))

    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"kernels": kernels, "end_to_end": e2e}, fh, indent=2)


if __name__ == "__main__":
    main()
