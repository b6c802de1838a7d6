import numpy as np


def sparse_spikes(rng, N, K):
    s = np.zeros(N)
    support = rng.choice(N, size=K, replace=False)
    s[support] = rng.choice([-1.0, 1.0], size=K)
    return s, np.sort(support)
