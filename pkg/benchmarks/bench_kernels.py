"""Compare the compiled kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--draws N] [--t-final T]

Reports wall time per call and checks that both backends agree.
"""

import argparse
import time

import numpy as np
import scipy.linalg

from hybridopto import _purepy
from hybridopto.cooling import build_linearized_system
from hybridopto.presets import fig5_params

try:
    from hybridopto import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_cubic(draws, repeat):
    rng = np.random.default_rng(0)
    k = 10 ** rng.uniform(-3, 1, draws)
    d = rng.uniform(-3, 5, draws)
    e = 10 ** rng.uniform(-6, 2, draws)
    rows = []
    results = {}
    for name, mod in (("compiled", _kernels), ("python", _purepy)):
        if mod is None:
            continue
        t, results[name] = best_of(lambda: mod.cubic_roots(k, d, e), repeat)
        rows.append((name, t))
    agree = None
    if len(results) == 2:
        (r1, c1), (r2, c2) = results["compiled"], results["python"]
        agree = bool(np.array_equal(c1, c2) and np.allclose(r1, r2, rtol=1e-12, equal_nan=True))
    return rows, agree


def bench_rodas(t_final, repeat):
    s = build_linearized_system(fig5_params())
    T, U = scipy.linalg.schur(s.M, output="complex")
    UH = U.conj().T
    X0 = UH @ np.diag([1, 1e4 + 1, 1, 1, 0, 1e4, 0, 0]).astype(complex) @ U
    D = UH @ s.D @ U
    t_out = np.array([0.0, t_final])
    rows, results = [], {}
    for name, mod in (("compiled", _kernels), ("python", _purepy)):
        if mod is None:
            continue
        t, out = best_of(lambda: mod.rodas4_lyapunov(T, D, X0, t_out, 0.0, 1e-6, 1e-10, 1e-4, 10**8), repeat)
        results[name] = out
        rows.append((name, t, out[1] + out[2]))
    agree = None
    if len(results) == 2:
        a, b = results["compiled"][0][-1], results["python"][0][-1]
        agree = bool(np.allclose(a, b, rtol=1e-8, atol=1e-8 * np.max(np.abs(a))))
    return rows, agree


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=100_000, help="cubic solves per call")
    ap.add_argument("--t-final", type=float, default=2000.0, help="covariance integration window (1/omega_m)")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not available; timing the numpy fallback only")

    rows, agree = bench_cubic(args.draws, args.repeat)
    print(f"cubic_roots, {args.draws} draws")
    for name, t in rows:
        print(f"  {name:9s} {t * 1e3:9.2f} ms  ({t / args.draws * 1e9:7.1f} ns/draw)")
    if len(rows) == 2:
        print(f"  speedup   {rows[1][1] / rows[0][1]:9.1f}x   backends agree: {agree}")

    rows, agree = bench_rodas(args.t_final, args.repeat)
    print(f"rodas4_lyapunov, Fig. 5 hybrid system, t = 0..{args.t_final:g}")
    for name, t, steps in rows:
        print(f"  {name:9s} {t * 1e3:9.2f} ms  ({steps} steps, {t / steps * 1e6:6.1f} us/step)")
    if len(rows) == 2:
        print(f"  speedup   {rows[1][1] / rows[0][1]:9.1f}x   backends agree: {agree}")


if __name__ == "__main__":
    main()
