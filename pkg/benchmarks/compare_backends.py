#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Covers the two hot loops (adaptive range coding, causal band
reconstruction) in isolation plus the full codec path. Both backends
produce identical bytes; only speed differs.

    python benchmarks/compare_backends.py [--size 256] [--repeats 5]
"""

import argparse
import time

import numpy as np

from mwpcodec import _backend, codec, imgio


def best_of(repeats, fn, *args):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best * 1e3, result


def bench_backend(name, kernels, img, repeats):
    rng = np.random.default_rng(0)
    symbols = np.abs(rng.normal(0, 60, size=200000)).astype(np.int32)
    symbols = np.minimum(symbols, 511)
    streams = [(symbols, np.array([], dtype=np.int64))]

    enc_ms, payload = best_of(repeats, kernels.encode_streams, streams)
    dec_ms, _ = best_of(repeats, kernels.decode_streams, payload,
                        [len(symbols)])

    acc = rng.integers(-(1 << 30), 1 << 30, size=(512, 512))
    res = rng.integers(-500, 500, size=(512, 512))
    rec_ms, _ = best_of(repeats, kernels.reconstruct_band, acc, res,
                        65536, -32768, 4096, 98304)

    with _backend.use(name):
        c_ms, container = best_of(repeats, codec.compress, img)
        d_ms, _ = best_of(repeats, codec.decompress, container)
    return {"rc encode 200k syms": enc_ms, "rc decode 200k syms": dec_ms,
            "reconstruct 512x512": rec_ms,
            f"compress {img.width}x{img.height}": c_ms,
            f"decompress {img.width}x{img.height}": d_ms}, container


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = _backend.available_backends()
    img = imgio.make_phantom("smooth_noise", args.size, args.size, 1)

    results = {}
    containers = {}
    for name in sorted(backends):
        results[name], containers[name] = bench_backend(
            name, backends[name], img, args.repeats)

    names = sorted(results)
    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'benchmark':{width}s} " + " ".join(f"{n:>12s}" for n in names)
    if len(names) == 2:
        header += f" {'speedup':>9s}"
    print(header)
    for key in next(iter(results.values())):
        row = f"{key:{width}s} " + " ".join(
            f"{results[n][key]:10.2f}ms" for n in names)
        if len(names) == 2:
            row += f" {results[names[1]][key] / results[names[0]][key]:8.1f}x"
        print(row)
    if len(containers) == 2:
        a, b = (containers[n] for n in names)
        print(f"\nbackends byte-identical: {a == b}")
    if "c" not in backends:
        print("\ncompiled kernels not built; run: python setup.py build_ext --inplace")


if __name__ == "__main__":
    main()
