#!/usr/bin/env python3
"""Timing comparison of the compiled and pure incremental-update kernels.

The annealing and binary-search runners spend almost all their time in
these three kernels, so this is the number that decides whether the
compiled core earns its keep. Also times a short end-to-end annealing run
per backend via the CGHKIT_PURE switch in a subprocess.

Usage: python benchmarks/bench_kernels.py [--size 128] [--repeat 2000]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from cghkit.kernels import available_backends


def make_case(size, seed=0):
    gen = np.random.default_rng(seed)
    holo = gen.normal(size=(size, size)) + 1j * gen.normal(size=(size, size))
    replay = np.fft.fft2(holo, norm="ortho")
    mask = np.ones((size, size), bool)
    mu, mv = np.nonzero(mask)
    idx = np.arange(size)
    row = np.exp(-2j * np.pi * np.outer(idx, idx) / size)
    col = np.exp(-2j * np.pi * np.outer(idx, idx) / size) / size
    return {
        "replay_m": np.ascontiguousarray(replay[mu, mv]),
        "target_m": np.ascontiguousarray(gen.random(size * size)),
        "mu": np.ascontiguousarray(mu, np.int32),
        "mv": np.ascontiguousarray(mv, np.int32),
        "row": row,
        "col": col,
    }


def time_kernel(fn, repeat):
    started = time.perf_counter()
    fn(repeat)
    return (time.perf_counter() - started) / repeat


def bench_backend(impl, size, repeat):
    case = make_case(size)
    gen = np.random.default_rng(1)
    pixels = gen.integers(0, size, size=(repeat, 2))
    deltas = gen.normal(size=repeat) + 1j * gen.normal(size=repeat)
    levels = np.ascontiguousarray(np.exp(2j * np.pi * np.arange(4) / 4))

    def run_delta(n):
        for i in range(n):
            m, c = pixels[i]
            impl.delta_error(
                case["replay_m"], case["target_m"], case["row"][m], case["col"][c],
                case["mu"], case["mv"], deltas[i],
            )

    def run_commit(n):
        for i in range(n):
            m, c = pixels[i]
            impl.commit_update(
                case["replay_m"], case["row"][m], case["col"][c],
                case["mu"], case["mv"], deltas[i],
            )

    def run_best(n):
        for i in range(n):
            m, c = pixels[i]
            impl.best_delta(
                case["replay_m"], case["target_m"], case["row"][m], case["col"][c],
                case["mu"], case["mv"], levels,
            )

    return {
        "delta_error": time_kernel(run_delta, repeat),
        "commit_update": time_kernel(run_commit, repeat),
        "best_delta(4 levels)": time_kernel(run_best, max(1, repeat // 4)),
    }


def bench_end_to_end():
    """Short annealing run per backend, in subprocesses so import-time selection applies."""
    code = (
        "import time, numpy as np\n"
        "from cghkit.algorithms import AlgorithmConfig, run_sa\n"
        "from cghkit.slm import SlmSpec, binary_phase\n"
        "from cghkit.propagation import PropagationSpec, MetricSpec\n"
        "from cghkit.image import rect_mask\n"
        "import cghkit.kernels as K\n"
        "t = np.zeros((64, 64)); t[16:48, 16:48] = 1.0\n"
        "cfg = AlgorithmConfig('sa', SlmSpec(64, 64, binary_phase()), PropagationSpec(),\n"
        "                      MetricSpec(rect_mask(64, 64)), seed=3, proposals=4000,\n"
        "                      initial_temperature=0.0)\n"
        "start = time.perf_counter()\n"
        "run_sa(cfg, t.astype(complex))\n"
        "print(K.BACKEND, time.perf_counter() - start)\n"
    )
    results = {}
    for backend, env_value in (("compiled", ""), ("pure", "1")):
        env = dict(os.environ, CGHKIT_PURE=env_value)
        if not env_value:
            env.pop("CGHKIT_PURE", None)
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        name, seconds = out.stdout.split()
        results[name] = float(seconds)
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=128, help="field edge length")
    parser.add_argument("--repeat", type=int, default=2000, help="kernel invocations")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}   field {args.size}x{args.size}, full mask\n")
    rows = {name: bench_backend(impl, args.size, args.repeat) for name, impl in backends.items()}

    kernels = list(next(iter(rows.values())))
    width = max(len(k) for k in kernels) + 2
    header = "kernel".ljust(width) + "".join(name.rjust(14) for name in rows)
    if len(rows) == 2:
        header += "speedup".rjust(10)
    print(header)
    for kernel in kernels:
        line = kernel.ljust(width)
        for name in rows:
            line += f"{rows[name][kernel] * 1e6:11.1f} us"
        if len(rows) == 2:
            line += f"{rows['pure'][kernel] / rows['compiled'][kernel]:9.1f}x"
        print(line)

    if len(backends) == 2:
        print("\nend-to-end annealing, 4000 proposals on 64x64:")
        for name, seconds in bench_end_to_end().items():
            print(f"  {name:9s} {seconds:6.2f} s")


if __name__ == "__main__":
    main()
