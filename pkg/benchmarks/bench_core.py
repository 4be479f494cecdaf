"""Compare the compiled and pure-Python trajectory cores.

Run with ``python3 benchmarks/bench_core.py [--steps N] [--repeat R]``.
Each kernel is fed identical pre-drawn inputs, so the timings isolate the
loop itself from random number generation.
"""

import argparse
import timeit

import numpy as np

from switchwalk import Normal, WalkSpec
from switchwalk import montecarlo as mc


def _cases(steps: int):
    rng = np.random.default_rng(0)
    x = np.where(rng.random(steps) < 2 / 3, -2, 1).astype(np.int64)
    xp = -x
    b = np.ones(steps, dtype=np.uint8)
    xr = rng.normal(size=steps)
    xpr = rng.normal(size=steps)
    gauss = WalkSpec.continuous(Normal(0.0, 1.0), Normal(0.0, 1.0))
    starts = rng.random(2000) + 0.01

    def walk(backend):
        core = mc.core_module(backend)
        return lambda: core.walk_int(0, x, xp, b)

    def walk_real(backend):
        core = mc.core_module(backend)
        return lambda: core.walk_real(0.0, xr, xpr, b)

    def ladder(backend):
        core = mc.core_module(backend)
        pos = core.walk_int(0, x, xp, b)
        return lambda: core.ladder_times_int(pos, b)

    def excursions(backend):
        return lambda: mc.excursions(gauss, starts, 1, max_steps=10 ** 5, backend=backend)

    return [("walk_int", walk), ("walk_real", walk_real), ("ladder_times_int", ladder),
            ("excursions (gaussian, 2000 starts)", excursions)]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=10 ** 6)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if len(mc.BACKENDS) < 2:
        print("compiled core not built; only the Python core is available")
    cases = _cases(args.steps)
    print(f"{'kernel':40s}" + "".join(f"{b:>12s}" for b in mc.BACKENDS) + ("   speedup" if len(mc.BACKENDS) > 1 else ""))
    for name, make in cases:
        times = []
        for backend in mc.BACKENDS:
            fn = make(backend)
            n = 1 if backend == "python" else 5
            times.append(min(timeit.repeat(fn, number=n, repeat=args.repeat)) / n)
        row = f"{name:40s}" + "".join(f"{t:11.4f}s" for t in times)
        if len(times) > 1:
            row += f"   {times[1] / times[0]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
