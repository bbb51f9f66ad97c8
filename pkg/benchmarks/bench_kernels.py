"""Compare the compiled and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--size 65536] [--repeat 7]

Prints the best-of-``repeat`` time per call for each kernel and backend, and
one full exponential step on a 256^2 grid with each backend swapped in.
"""
import argparse
import timeit

import numpy as np

from sigmaevo import kernels
from sigmaevo.nonlinear import DuhamelStepper, NonlinearitySpec
from sigmaevo.spectral import Grid


def best(func, repeat, number):
    return min(timeit.repeat(func, repeat=repeat, number=number)) / number


def kernel_cases(size, rng):
    a = rng.uniform(0, 50, size)
    uh = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    vh = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    nh = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    real = rng.standard_normal(size)

    def cases(mod):
        syms = mod.damped_symbols(a, 0.05)
        return {
            "damped_symbols": lambda: mod.damped_symbols(a, 0.05),
            "duhamel_update": lambda: mod.duhamel_update(uh, vh, nh, *syms),
            "abs_pow (real)": lambda: mod.abs_pow(real, 1.95),
            "abs_pow (complex)": lambda: mod.abs_pow(uh, 1.95),
            "abs_pow_sum": lambda: mod.abs_pow_sum(real, 3.9),
        }

    return cases


def step_case(mod, repeat):
    """One stepper step with ``mod`` supplying the kernels it owns in the dispatch.

    The power kernels stay on numpy for both rows, as in the package itself.
    """
    saved = {name: getattr(kernels, name) for name in ("damped_symbols", "duhamel_update")}
    for name in saved:
        setattr(kernels, name, getattr(mod, name))
    try:
        g = Grid(2, 256, 64.0)
        stepper = DuhamelStepper(g, 1.0, NonlinearitySpec("modified", alpha=0.5, p=1.95, q=1.95))
        u = np.exp(-(g.coords[0] ** 2 + g.coords[1] ** 2))
        uh = np.fft.fftn(u).ravel()
        vh = uh.copy()
        stepper.step(uh, vh, 0.05)  # warm the symbol cache
        return best(lambda: stepper.step(uh, vh, 0.05), repeat, 5)
    finally:
        for name, func in saved.items():
            setattr(kernels, name, func)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=65536)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy backend is timed")
    cases = kernel_cases(args.size, np.random.default_rng(0))
    names = list(backends)
    print(f"size {args.size}, best of {args.repeat}; times in ms")
    print(f"{'kernel':<20}" + "".join(f"{n:>12}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    timings = {n: {k: best(f, args.repeat, 20) for k, f in cases(backends[n]).items()} for n in names}
    for kernel in timings[names[0]]:
        row = [timings[n][kernel] for n in names]
        line = f"{kernel:<20}" + "".join(f"{1e3 * t:>12.3f}" for t in row)
        if len(row) > 1:
            line += f"{row[0] / row[1]:>10.2f}x"
        print(line)
    steps = [step_case(backends[n], args.repeat) for n in names]
    line = f"{'step 256^2':<20}" + "".join(f"{1e3 * t:>12.3f}" for t in steps)
    if len(steps) > 1:
        line += f"{steps[0] / steps[1]:>10.2f}x"
    print(line)


if __name__ == "__main__":
    main()
