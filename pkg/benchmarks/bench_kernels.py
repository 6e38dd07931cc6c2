"""Kernel timing: numba vs pure numpy.

Each backend runs in its own interpreter (the switch is read at import), so
this script re-invokes itself with FANSUB_DISABLE_NUMBA set or unset.

    python3 benchmarks/bench_kernels.py [--batch 20000] [--points 5000]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _worker(batch: int, points: int, seed: int) -> dict:
    from fansub import kernels
    from fansub._jit import USING_NUMBA
    from fansub.witness import builtin_witness

    cfg = builtin_witness().to_float()
    x0 = kernels.pack(cfg)
    par = kernels.pack_datum(cfg.datum)
    n = cfg.n
    rng = np.random.default_rng(seed)
    X = x0 + 1e-3 * rng.standard_normal((batch, x0.size))

    # warm-up (includes JIT compile / cache load)
    t = time.perf_counter()
    kernels.eval_batch(X[:2], par, n, False)
    warm = time.perf_counter() - t

    t = time.perf_counter()
    EQ, MG = kernels.eval_batch(X, par, n, False)
    t_batch = time.perf_counter() - t

    t = time.perf_counter()
    for k in range(points):
        kernels.eval_point(X[k % batch], par, n, False)
    t_point = time.perf_counter() - t

    return {
        "numba": USING_NUMBA,
        "warmup_s": warm,
        "batch_s": t_batch,
        "point_us": 1e6 * t_point / points,
        "checksum": float(np.abs(EQ).sum() + np.abs(MG).sum()),
    }


def _run(disable: bool, args) -> dict:
    env = dict(os.environ)
    if disable:
        env["FANSUB_DISABLE_NUMBA"] = "1"
    else:
        env.pop("FANSUB_DISABLE_NUMBA", None)
    cmd = [sys.executable, __file__, "--worker", "--batch", str(args.batch),
           "--points", str(args.points), "--seed", str(args.seed)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=20000)
    ap.add_argument("--points", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        print(json.dumps(_worker(args.batch, args.points, args.seed)))
        return 0

    jit = _run(False, args)
    ref = _run(True, args)
    if not jit["numba"]:
        print("numba not available; both runs used numpy")
    rel = abs(jit["checksum"] - ref["checksum"]) / max(1.0, abs(ref["checksum"]))
    print(f"{'backend':<8} {'warm-up s':>10} {'batch s':>10} {'point us':>10}")
    for name, r in (("numba", jit), ("numpy", ref)):
        print(f"{name:<8} {r['warmup_s']:>10.3f} {r['batch_s']:>10.4f} {r['point_us']:>10.1f}")
    print(f"batch speedup  {ref['batch_s'] / jit['batch_s']:.1f}x")
    print(f"point speedup  {ref['point_us'] / jit['point_us']:.1f}x")
    print(f"checksum rel. difference {rel:.2e}")
    return 0 if rel < 1e-12 else 1


if __name__ == "__main__":
    sys.exit(main())
