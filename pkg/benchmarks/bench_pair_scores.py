"""Benchmark the gated pairwise score kernel: compiled vs NumPy backend.

The kernel is the hot spot of the attention stages: cost O(m*n*d) with a
sigmoid per element.  The NumPy path materialises the (m, n, d) tensor;
the compiled path streams it.  Run:

    python3 benchmarks/bench_pair_scores.py
"""

import time

import numpy as np

from memefuse.backends import pair_scores_np

try:
    from memefuse.backends import _pair_scores_cy as pair_scores_cy
except ImportError:
    pair_scores_cy = None

CASES = [
    # (m patches, n tokens, d) -- last row is production scale (ViT patches, BERT tokens)
    (6, 8, 16),
    (32, 24, 64),
    (196, 32, 256),
    (196, 32, 768),
]
REPEATS = 5


def run_once(backend, xw, yu, b, v, c, ds):
    n = yu.shape[0]
    start = time.perf_counter()
    scores, ctx = backend.forward(xw, yu, b, v, c, n)
    mid = time.perf_counter()
    backend.backward(ctx, v, ds, b)
    end = time.perf_counter()
    return mid - start, end - mid, scores


def bench_case(m, n, d):
    rng = np.random.default_rng(0)
    xw = rng.standard_normal((m, d))
    yu = rng.standard_normal((n, d))
    b = rng.standard_normal(d)
    v = rng.standard_normal(d)
    ds = rng.standard_normal((m, n))
    rows = {}
    for name, backend in (("numpy", pair_scores_np), ("compiled", pair_scores_cy)):
        if backend is None:
            continue
        fwd = bwd = float("inf")
        scores = None
        for _ in range(REPEATS):
            f, w, scores = run_once(backend, xw, yu, b, v, 0.1, ds)
            fwd, bwd = min(fwd, f), min(bwd, w)
        rows[name] = (fwd, bwd, scores)
    return rows


def main():
    print(f"{'case':<18}{'backend':<10}{'forward':>12}{'backward':>12}{'speedup':>9}")
    for m, n, d in CASES:
        rows = bench_case(m, n, d)
        base = rows.get("numpy")
        for name, (fwd, bwd, scores) in rows.items():
            speedup = ""
            if name == "compiled" and base is not None:
                speedup = f"{(base[0] + base[1]) / (fwd + bwd):>8.2f}x"
            print(f"m={m:<4}n={n:<4}d={d:<5}{name:<10}{fwd * 1e3:>10.2f}ms{bwd * 1e3:>10.2f}ms{speedup:>9}")
        if len(rows) == 2:
            drift = np.abs(rows["numpy"][2] - rows["compiled"][2]).max()
            assert drift < 1e-9, f"backends disagree by {drift}"
    if pair_scores_cy is None:
        print("\ncompiled backend not built; showing NumPy fallback only")


if __name__ == "__main__":
    main()
