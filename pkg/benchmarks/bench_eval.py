"""Tape evaluation: numba kernel against the pure-numpy fallback.

    python3 benchmarks/bench_eval.py [--points N] [--repeat R]

The workload is the Weyl tensor of the boris metric plus the flag-curvature
inputs of the Randers example, which is what the ASD and isotropy checks
evaluate in bulk.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pathgeom import exprcore as ec
from pathgeom import fixtures as fx
from pathgeom.curvature import curvature_cached
from pathgeom.exprcore.kernels import HAVE_NUMBA, run_tape
from pathgeom.finsler import FlagCurvature, randers_from_zermelo


def workloads():
    m = fx.metric("boris")
    weyl = list(curvature_cached(m).weyl.values())
    yield "boris weyl", weyl, m.ctx
    F4 = randers_from_zermelo(fx.rotating_zermelo()).finsler(fx.ROTATING_FIBER)
    fc = FlagCurvature(F4)
    yield "randers jacobi", fc.exprs, F4.ctx


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=ec.DEFAULT_SEED)
    opt = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'workload':16s} {'nodes':>6s} {'points':>7s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    rows = []
    for name, exprs, ctx in workloads():
        tape = ec.evaluate.compiled(exprs, ctx.names)
        X = ctx.sample(np.random.default_rng(opt.seed), opt.points)
        ref = run_tape(tape, X, "numpy")
        secs = {}
        for b in backends:
            run_tape(tape, X[:8], b)  # compile outside the timing
            out = run_tape(tape, X, b)
            ok = out[2] < 0
            if not np.allclose(out[0][ok], ref[0][ok], rtol=1e-12, atol=1e-12):
                raise SystemExit(f"{b} disagrees with numpy on {name}")
            secs[b] = best_of(lambda: run_tape(tape, X, b), opt.repeat)
        speed = secs["numpy"] / secs["numba"] if "numba" in secs else float("nan")
        print(f"{name:16s} {len(tape.nodes):6d} {opt.points:7d} " + " ".join(f"{secs[b]:9.4f}s" for b in backends) + f"   {speed:6.1f}x")
        rows.append((name, secs))
    return rows


if __name__ == "__main__":
    main()
