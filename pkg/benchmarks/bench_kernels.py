"""Time the numba kernels against the plain-Python fallback.

Each backend runs in its own interpreter, because the fallback is chosen at
import time from ZETATMD_DISABLE_NUMBA.  Workloads are timed after one warm-up
call (which also triggers JIT compilation) and each backend's result digest is
compared, since both paths must agree bit for bit.

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --scale 2 --repeat 5
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

WORKLOADS = ("assignment", "cycles", "tmd")


def _workload(name, scale):
    import numpy as np

    from zetatmd.assignment import solve_assignment
    from zetatmd.datagen import GenSpec, generate
    from zetatmd.tmd import pairwise_tmd
    from zetatmd.transforms import PatternFamilySpec, cycle_node_counts

    if name == "assignment":
        rng = np.random.default_rng(0)
        mats = [rng.random((30 * scale, 30 * scale)) for _ in range(20)]
        return lambda: np.array([solve_assignment(m).total_cost for m in mats])
    if name == "cycles":
        ds = generate(GenSpec("er", {"p": 0.15}, (20 * scale, 25 * scale), 10, 1))
        spec = PatternFamilySpec("subgraph", 6)
        return lambda: np.concatenate([cycle_node_counts(g, spec).ravel() for g in ds.graphs])
    ds = generate(GenSpec("er", {"p": 0.2}, (8 * scale, 14 * scale), 12, 2))
    return lambda: pairwise_tmd(ds, 3).values


def child(name, scale, repeat):
    from zetatmd._accel import backend

    fn = _workload(name, scale)
    out = fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    digest = hashlib.sha256(out.astype("float64").tobytes()).hexdigest()[:16]
    print(json.dumps({"backend": backend(), "best": min(times), "digest": digest}))


def run(name, scale, repeat, disable):
    env = dict(os.environ)
    env.pop("ZETATMD_DISABLE_NUMBA", None)
    if disable:
        env["ZETATMD_DISABLE_NUMBA"] = "1"
    cmd = [sys.executable, __file__, "--child", name, "--scale", str(scale), "--repeat", str(repeat)]
    res = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", type=int, default=1, help="problem size multiplier")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--only", choices=WORKLOADS, action="append")
    p.add_argument("--child", choices=WORKLOADS, help=argparse.SUPPRESS)
    args = p.parse_args(argv)
    if args.child:
        child(args.child, args.scale, args.repeat)
        return 0

    print(f"{'workload':<12}{'numba s':>10}{'python s':>10}{'speedup':>10}  same result")
    ok = True
    for name in args.only or WORKLOADS:
        fast = run(name, args.scale, args.repeat, disable=False)
        slow = run(name, args.scale, args.repeat, disable=True)
        same = fast["digest"] == slow["digest"]
        ok &= same
        print(f"{name:<12}{fast['best']:>10.4f}{slow['best']:>10.4f}{slow['best'] / fast['best']:>9.1f}x  {same}")
        if fast["backend"] != "numba":
            print("  (numba unavailable: both columns ran the Python fallback)")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
