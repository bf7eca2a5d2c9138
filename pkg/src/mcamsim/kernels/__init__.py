"""Search kernels with a compiled core and a numpy fallback.

The compiled module is used when it was built and ``MCAMSIM_PURE_PYTHON`` is
unset.  Both implementations return identical values.
"""

import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback
if not os.environ.get("MCAMSIM_PURE_PYTHON"):
    try:
        from . import _native as _impl  # noqa: F811

        BACKEND = "native"
    except ImportError:
        _impl = _fallback


def _ints(a):
    return np.ascontiguousarray(a, dtype=np.int32)


def lut_scores(lut, queries, rows, impl=None):
    """``out[q, r] = sum_j lut[queries[q, j], rows[r, j]]``."""
    impl = impl or _impl
    return impl.lut_scores(np.ascontiguousarray(lut, dtype=np.float64), _ints(queries), _ints(rows))


def table_scores(tables, queries, impl=None):
    """``out[q, r] = sum_j tables[r, j, queries[q, j]]`` for per-cell tables."""
    impl = impl or _impl
    return impl.table_scores(np.ascontiguousarray(tables, dtype=np.float64), _ints(queries))


def hamming_scores(qbits, rbits, impl=None):
    """Pairwise Hamming distances between packed uint64 bit words."""
    impl = impl or _impl
    return impl.hamming_scores(np.ascontiguousarray(qbits, dtype=np.uint64),
                               np.ascontiguousarray(rbits, dtype=np.uint64))


def first_argmin(scores, impl=None):
    """Row-wise argmin, lowest index on ties."""
    impl = impl or _impl
    return impl.first_argmin(np.ascontiguousarray(scores, dtype=np.float64))


def pack_bits(bits) -> np.ndarray:
    """Pack a ``(n, n_bits)`` 0/1 array into ``(n, ceil(n_bits/64))`` uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8)
    n, nb = bits.shape
    nw = (nb + 63) // 64
    padded = np.zeros((n, nw * 64), dtype=np.uint8)
    padded[:, :nb] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).reshape(n, nw)


__all__ = ["BACKEND", "lut_scores", "table_scores", "hamming_scores", "first_argmin", "pack_bits"]
