"""Pure numpy/Python versions of the compiled kernels."""
import numpy as np

BACKEND = "python"


def max_pair_coherence(cols):
    cols = np.ascontiguousarray(cols, dtype=np.float64)
    best = 0.0
    for i in range(cols.shape[0] - 1):
        dots = np.abs(cols[i + 1:] @ cols[i])
        best = max(best, float(dots.max()))
    return best


def xor_chains(w, n):
    w = np.asarray(w, dtype=np.uint8) & 1
    parity = np.bitwise_xor.reduce(w.reshape(n, -1), axis=1)
    p = np.bitwise_xor.accumulate(parity)
    q = np.bitwise_xor.accumulate(parity[::-1])
    return p, q, p ^ q


def fisher_yates(draws):
    perm = list(range(len(draws) + 1))
    N = len(perm)
    for i in range(N - 1, 0, -1):
        j = int(draws[N - 1 - i])
        perm[i], perm[j] = perm[j], perm[i]
    return np.asarray(perm, dtype=np.int64)


def hamming(a, b):
    a = np.asarray(a, dtype=np.uint8) & 1
    b = np.asarray(b, dtype=np.uint8) & 1
    return int(np.count_nonzero(a != b))
