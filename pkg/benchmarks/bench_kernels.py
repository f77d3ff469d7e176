"""Compare the compiled and pure-Python kernel backends.

Two parts:

* kernel timings on seeded synthetic rule systems and graphs, calling each
  backend directly (results are cross-checked);
* end-to-end timings of real workloads, run in fresh interpreters with and
  without ``FAIRCK_PURE=1`` (the backend is chosen at import).

Usage: python3 benchmarks/bench_kernels.py [--sizes 10000 100000] [--repeat 5] [--json]
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import time
from array import array

from fairck import kernels


def rule_system(n: int, rng: random.Random, rules_per_judgment: float = 1.5, max_premises: int = 3):
    """Compressed rules over ``n`` judgments; about 5% of rules are axioms."""
    concl, ptr, prems = array("i"), array("i", [0]), array("i")
    for _ in range(int(n * rules_per_judgment)):
        concl.append(rng.randrange(n))
        k = 0 if rng.random() < 0.05 else rng.randint(1, max_premises)
        prems.extend(sorted(rng.sample(range(n), k)))
        ptr.append(len(prems))
    return concl, ptr, prems


def graph(n: int, rng: random.Random, degree: int = 3):
    ptr, adj = array("i", [0]), array("i")
    for _ in range(n):
        adj.extend(sorted(rng.sample(range(n), degree)))
        ptr.append(len(adj))
    return ptr, adj


def best_of(repeat: int, fn) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def kernel_rows(sizes, repeat: int, seed: int):
    names = ["python"] + (["compiled"] if kernels._compiled is not None else [])
    rows = []
    for n in sizes:
        rng = random.Random(seed + n)
        concl, ptr, prems = rule_system(n, rng)
        gptr, gadj = graph(n, rng)
        sources = rng.sample(range(n), 8)
        cases = {
            "lfp": lambda b: b.lfp(n, concl, ptr, prems),
            "gfp": lambda b: b.gfp(n, concl, ptr, prems, None),
            "bfs": lambda b: b.bfs(n, gptr, gadj, sources, None),
        }
        for kernel, call in cases.items():
            times, results = {}, {}
            for name in names:
                b = kernels.backend(name)
                times[name], out = best_of(repeat, lambda: call(b))
                results[name] = tuple(bytes(x) if isinstance(x, (bytes, bytearray)) else list(x) for x in out)
            if len(results) == 2 and results["python"] != results["compiled"]:
                raise SystemExit(f"backends disagree on {kernel} n={n}")
            rows.append({"kernel": kernel, "n": n, **{f"{k}_ms": v * 1000 for k, v in times.items()}})
    return rows


WORKLOADS = {
    "selftest (exhaustive <= 3 states + 100 random)":
        "from fairck.selftest import run_selftest; run_selftest(max_states=3, random_count=100)",
    "57,747 strategy clients (<= 4 nodes), bulk compliance":
        "import itertools; from fairck import checkers; from fairck.generate import random_systems; "
        "from fairck.semantics import Config; from fairck.witness import strategy_client_system; "
        "sys_ = next(itertools.islice(random_systems(5, 2024, max_states=4, alphabet_size=2), 4, None)); "
        "ext, roots = strategy_client_system(sys_, 1, 4); "
        "checkers.compliance_batch(ext, [Config(r, 1) for r in roots])",
}


def end_to_end_rows(repeat: int):
    rows = []
    for label, code in WORKLOADS.items():
        row = {"workload": label}
        modes = [("python", "1")] + ([("compiled", "0")] if kernels._compiled is not None else [])
        for name, pure in modes:
            env = dict(os.environ, FAIRCK_PURE=pure)
            timer = f"import time; _t0 = time.perf_counter(); {code}; print(time.perf_counter() - _t0)"
            samples = []
            for _ in range(repeat):
                out = subprocess.run([sys.executable, "-c", timer], env=env, capture_output=True, text=True, check=True)
                samples.append(float(out.stdout.strip().splitlines()[-1]))
            row[f"{name}_s"] = min(samples)
        rows.append(row)
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10_000, 100_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--skip-end-to-end", action="store_true")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    report = {"compiled_available": kernels._compiled is not None,
              "kernels": kernel_rows(args.sizes, args.repeat, args.seed)}
    if not args.skip_end_to_end:
        report["end_to_end"] = end_to_end_rows(max(1, args.repeat // 2))
    if args.json:
        print(json.dumps(report, indent=2))
        return 0

    print(f"compiled kernels available: {report['compiled_available']}")
    print(f"{'kernel':<6} {'n':>8} {'python ms':>11} {'compiled ms':>12} {'speedup':>8}")
    for r in report["kernels"]:
        c = r.get("compiled_ms")
        speed = f"{r['python_ms'] / c:7.1f}x" if c else "    n/a"
        print(f"{r['kernel']:<6} {r['n']:>8} {r['python_ms']:>11.2f} {c if c else float('nan'):>12.2f} {speed:>8}")
    for r in report.get("end_to_end", []):
        c = r.get("compiled_s")
        speed = f"{r['python_s'] / c:.2f}x" if c else "n/a"
        print(f"{r['workload']}: python {r['python_s']:.2f}s, compiled {c if c else float('nan'):.2f}s, speedup {speed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
