"""Benchmark the compiled kernels against the numpy fallback.

Times the convolution and pooling primitives on the shapes the two
classifier architectures actually run (lyric batches and 48x48 mood
images), forward and backward, and prints a per-kernel comparison.

    python benchmarks/bench_kernels.py [--repeats 30]
"""

import argparse
import time

import numpy as np

from moodtunes.nn.kernels import get_backend


def time_call(fn, *args, repeats):
    fn(*args)  # warm up
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def benchmark(repeats):
    rng = np.random.default_rng(0)
    f32 = np.float32

    # lyric model shapes: batch 32, sequence 64, embedding 32 -> 64 filters
    x1 = rng.standard_normal((32, 64, 32)).astype(f32)
    w1 = rng.standard_normal((3, 32, 64)).astype(f32)
    b1 = rng.standard_normal(64).astype(f32)
    gy1 = rng.standard_normal((32, 62, 64)).astype(f32)

    # image model shapes: batch 32, 48x48x1 -> 8 filters, then 23x23x8 -> 16
    xa = rng.standard_normal((32, 48, 48, 1)).astype(f32)
    wa = rng.standard_normal((3, 3, 1, 8)).astype(f32)
    ba = rng.standard_normal(8).astype(f32)
    gya = rng.standard_normal((32, 46, 46, 8)).astype(f32)

    xb = rng.standard_normal((32, 23, 23, 8)).astype(f32)
    wb = rng.standard_normal((3, 3, 8, 16)).astype(f32)
    bb = rng.standard_normal(16).astype(f32)
    gyb = rng.standard_normal((32, 21, 21, 16)).astype(f32)

    xp = rng.standard_normal((32, 46, 46, 8)).astype(f32)

    cases = [
        ("conv1d fwd  (32,64,32)x64f", "conv1d_forward", (x1, w1, b1)),
        ("conv1d bwd  (32,64,32)x64f", "conv1d_backward", (x1, w1, gy1)),
        ("conv2d fwd  (32,48,48,1)x8f", "conv2d_forward", (xa, wa, ba)),
        ("conv2d bwd  (32,48,48,1)x8f", "conv2d_backward", (xa, wa, gya)),
        ("conv2d fwd  (32,23,23,8)x16f", "conv2d_forward", (xb, wb, bb)),
        ("conv2d bwd  (32,23,23,8)x16f", "conv2d_backward", (xb, wb, gyb)),
        ("maxpool fwd (32,46,46,8)", "maxpool2d_forward", (xp, 2)),
    ]

    backends = {}
    for name in ("python", "cython"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"backend {name!r} unavailable, skipping")

    header = f"{'kernel':<30}" + "".join(f"{n:>12}" for n in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, fn_name, args in cases:
        times = {}
        for name, backend in backends.items():
            times[name] = time_call(getattr(backend, fn_name), *args, repeats=repeats)
        row = f"{label:<30}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in backends)
        if len(times) == 2:
            row += f"{times['python'] / times['cython']:>9.2f}x"
        print(row)


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=30)
    benchmark(parser.parse_args().repeats)
