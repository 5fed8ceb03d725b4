"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the potential-gap kernel on a large node array and a full shooting
integration, once per backend, and prints the speed-up.
"""

import argparse
import math
import time

import numpy as np

from oscibif import _pykernels
from oscibif.model import ProblemParams, potential_F
from oscibif.timemap import mu_of_alpha

try:
    from oscibif import _kernels
except ImportError:
    _kernels = None


def _best(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    p, alpha = 3.0, 50.0
    t = np.geomspace(1e-300, 1.0, 200_000)
    s = 1.0 - t
    mu = mu_of_alpha(ProblemParams(p), alpha)
    v0 = math.sqrt(2.0 * mu * potential_F(ProblemParams(p), alpha))

    backends = [("python", _pykernels)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled kernels not available; timing the fallback only")

    timings = {}
    for name, mod in backends:
        rad = _best(lambda: mod.radicand(p, alpha, s, t), args.repeat)
        sh = _best(lambda: mod.shoot_dp45(p, mu, alpha, 0.0, v0, 1e-10, 10_000_000), args.repeat)
        timings[name] = (rad, sh)
        print(f"{name:>7}: radicand {rad * 1e3:9.3f} ms   shooting {sh * 1e3:9.3f} ms")
    if len(timings) == 2:
        (pr, ps), (cr, cs) = timings["python"], timings["cython"]
        print(f"speed-up: radicand x{pr / cr:.1f}   shooting x{ps / cs:.1f}")


if __name__ == "__main__":
    main()
