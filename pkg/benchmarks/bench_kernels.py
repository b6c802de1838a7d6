"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per kernel and checks both backends agree.
"""
import argparse
import timeit

import numpy as np

from csoutsource import _fallback

try:
    from csoutsource import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    cols = rng.standard_normal((256, 256))
    cols /= np.linalg.norm(cols, axis=0)
    w = rng.integers(0, 2, 4096).astype(np.uint8)
    draws = np.array([rng.integers(i + 1) for i in range(4095, 0, -1)], dtype=np.int64)
    a = rng.integers(0, 2, 1 << 16).astype(np.uint8)
    b = rng.integers(0, 2, 1 << 16).astype(np.uint8)
    return {
        "max_pair_coherence N=256": ("max_pair_coherence", (np.ascontiguousarray(cols),)),
        "xor_chains N=4096 n=128": ("xor_chains", (w, 128)),
        "fisher_yates N=4096": ("fisher_yates", (draws,)),
        "hamming 64k bits": ("hamming", (a, b)),
    }


def best_time(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def same(x, y):
    if isinstance(x, tuple):
        return all(same(a, b) for a, b in zip(x, y))
    return np.allclose(x, y, rtol=1e-12, atol=1e-14)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(args.seed)

    print(f"{'kernel':<28}{'python ms':>12}{'cython ms':>12}{'speedup':>10}  agree")
    for label, (name, call_args) in cases(rng).items():
        t_py = best_time(getattr(_fallback, name), call_args, args.repeat)
        if _kernels is None:
            print(f"{label:<28}{t_py * 1e3:>12.4f}{'-':>12}{'-':>10}  -")
            continue
        fast = getattr(_kernels, name)
        t_cy = best_time(fast, call_args, args.repeat)
        agree = same(getattr(_fallback, name)(*call_args), fast(*call_args))
        print(f"{label:<28}{t_py * 1e3:>12.4f}{t_cy * 1e3:>12.4f}{t_py / t_cy:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
