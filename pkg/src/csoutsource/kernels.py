"""Kernel dispatch: the compiled extension when it was built, else numpy.

Set ``CSOUTSOURCE_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _fallback

if os.environ.get("CSOUTSOURCE_PURE_PYTHON"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND


def max_pair_coherence(cols):
    return _impl.max_pair_coherence(np.ascontiguousarray(cols, dtype=np.float64))


def xor_chains(w, n):
    return _impl.xor_chains(np.ascontiguousarray(w, dtype=np.uint8), int(n))


def fisher_yates(draws):
    return _impl.fisher_yates(np.ascontiguousarray(draws, dtype=np.int64))


def hamming(a, b):
    return int(_impl.hamming(np.ascontiguousarray(a, dtype=np.uint8),
                             np.ascontiguousarray(b, dtype=np.uint8)))
