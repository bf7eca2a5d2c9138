"""Numpy implementations of the search kernels.

Accumulation runs position by position, matching the compiled loops
operation for operation.
"""

import numpy as np


def lut_scores(lut, queries, rows):
    nq, w = queries.shape
    out = np.zeros((nq, rows.shape[0]))
    for j in range(w):
        out += lut[queries[:, j][:, None], rows[:, j][None, :]]
    return out


def table_scores(tables, queries):
    nr, w, _ = tables.shape
    out = np.zeros((queries.shape[0], nr))
    cols = np.arange(nr)
    for j in range(w):
        out += tables[cols[None, :], j, queries[:, j][:, None]]
    return out


_POP8 = np.array([bin(k).count("1") for k in range(256)], dtype=np.int64)


def hamming_scores(qbits, rbits):
    x = qbits[:, None, :] ^ rbits[None, :, :]
    return _POP8[x.view(np.uint8)].reshape(x.shape + (8,)).sum(axis=(-1, -2))


def first_argmin(scores):
    return np.argmin(scores, axis=1).astype(np.int64)
