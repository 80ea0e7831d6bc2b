"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--modes 4000] [--points 2000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from photonwf import backend


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, default=4000, help="plane-wave modes in the Fourier sum")
    ap.add_argument("--points", type=int, default=2000, help="spatial sample points")
    ap.add_argument("--lines", type=int, default=40000, help="stencil lines of length 49")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    kvec = rng.normal(size=(args.modes, 3)) + [0.0, 0.0, 10.0]
    omega = np.linalg.norm(kvec, axis=1)
    amps = rng.normal(size=(args.modes, 3)) + 1j * rng.normal(size=(args.modes, 3))
    points = rng.normal(scale=5.0, size=(args.points, 3))
    f = rng.normal(size=(args.lines, 49)) + 1j * rng.normal(size=(args.lines, 49))
    valid = rng.random(size=f.shape) > 0.01

    print(f"backends: {', '.join(backend.available())}; threads: {backend.threads()}")
    results = {}
    for name in backend.available():
        t_sum, s = best_of(lambda: backend.fourier_sum(kvec, omega, amps, points, 1.5, name),
                           args.repeat)
        t_der, d = best_of(lambda: backend.stencil_derivative(f, valid, 0.1, name), args.repeat)
        results[name] = (s, d)
        print(f"{name:>9}: fourier_sum {t_sum * 1e3:9.1f} ms   stencil {t_der * 1e3:8.1f} ms")
    if len(results) == 2:
        (s1, (d1, ok1)), (s2, (d2, ok2)) = results["compiled"], results["python"]
        print(f"max |compiled - python|: fourier_sum {np.abs(np.asarray(s1) - s2).max():.1e}, "
              f"stencil {np.abs(d1 - d2)[ok1].max():.1e}, masks equal {bool(np.all(ok1 == ok2))}")


if __name__ == "__main__":
    main()
