#!/usr/bin/env python3
"""Compare the compiled kernel backend against the pure numpy/scipy fallback.

Times the three hot kernels at training-realistic shapes, then a short
end-to-end training run on a synthetic corpus with each backend.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from banglabot import kernels
from banglabot.corpus import parse_nlu_file
from banglabot.pipeline import load_preset, train_pipeline
from banglabot.synthetic import generate_synthetic_corpus


def time_call(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(repeat: int) -> None:
    rng = np.random.default_rng(0)
    n_params = 500_000
    p = rng.normal(size=n_params)
    g = rng.normal(size=n_params)

    rows, sparse_dim, embed = 320, 2000, 64
    nnz_per_row = 40
    indptr = np.arange(0, rows * nnz_per_row + 1, nnz_per_row, dtype=np.int64)
    indices = rng.integers(0, sparse_dim, size=rows * nnz_per_row).astype(np.int64)
    data = rng.normal(size=rows * nnz_per_row)
    w = rng.normal(size=(sparse_dim, embed))
    grad_out = rng.normal(size=(rows, embed))

    print(f"{'kernel':<22} " + "  ".join(f"{name:>12}" for name in kernels.available_backends()))
    results: dict[str, dict[str, float]] = {}
    for name in kernels.available_backends():
        backend = kernels.get_backend(name)
        r: dict[str, float] = {}
        m, v = np.zeros(n_params), np.zeros(n_params)
        r["adam_step"] = time_call(
            lambda: backend.adam_step(p.copy(), g, m, v, 5, 0.05, 0.9, 0.999, 1e-8),
            repeat=repeat)
        out = np.zeros((rows, embed))
        r["csr_dense_matmul"] = time_call(
            lambda: backend.csr_dense_matmul(indptr, indices, data, w, out), repeat=repeat)
        grad_w = np.zeros((sparse_dim, embed))
        r["csr_t_dense_accum"] = time_call(
            lambda: backend.csr_t_dense_accum(indptr, indices, data, grad_out, grad_w),
            repeat=repeat)
        results[name] = r
    for kernel in ("adam_step", "csr_dense_matmul", "csr_t_dense_accum"):
        row = f"{kernel:<22} "
        row += "  ".join(f"{results[name][kernel] * 1e3:>10.3f}ms" for name in results)
        print(row)


def bench_training(epochs: int) -> None:
    nlu, _, _ = generate_synthetic_corpus(42, 8, 8, 2)
    ts = parse_nlu_file(nlu)
    config = load_preset("P8")
    config.model.epochs = epochs
    print(f"\nend-to-end training ({epochs} epochs, {len(ts.examples)} examples):")
    for name in kernels.available_backends():
        backend = kernels.get_backend(name)
        t0 = time.perf_counter()
        fitted = train_pipeline(config, ts, seed=42, backend=backend)
        dt = time.perf_counter() - t0
        print(f"  {name:>9}: {dt:6.2f}s (final loss {fitted.model.loss_curve[-1]:.6f})")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="fewer repeats, fewer epochs")
    args = parser.parse_args()
    print(f"available backends: {kernels.available_backends()} (default: {kernels.ACTIVE.NAME})\n")
    bench_kernels(repeat=3 if args.quick else 10)
    bench_training(epochs=60 if args.quick else 200)


if __name__ == "__main__":
    main()
