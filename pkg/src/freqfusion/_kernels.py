"""Compiled hot loops.

Every kernel accumulates each output element in a fixed order, and the
parallel loops only partition *outputs* across workers, so results are
bit-identical for any thread count.  fastmath stays off: reassociation
or FMA contraction would change the rounding sequence.
"""
import warnings

import numba
import numpy as np
from numba import njit, prange

# an outdated system TBB only makes numba fall back to another threading layer
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)


@njit(cache=True, parallel=True)
def conv2d_padded(padded, weight, bias, stride, out):
    cout, ho, wo = out.shape
    cin = padded.shape[0]
    k = weight.shape[2]
    for co in prange(cout):
        for i in range(ho):
            for j in range(wo):
                out[co, i, j] = 0.0
        # (cin, ky, kx) ascending per output pixel; rows stay contiguous inner
        for ci in range(cin):
            for ky in range(k):
                for kx in range(k):
                    wv = weight[co, ci, ky, kx]
                    for i in range(ho):
                        r = i * stride + ky
                        for j in range(wo):
                            out[co, i, j] += wv * padded[ci, r, j * stride + kx]
        b = bias[co]
        for i in range(ho):
            for j in range(wo):
                out[co, i, j] += b


@njit(cache=True, parallel=True)
def filter_field_padded(padded, field, out):
    c_, h, w = out.shape
    k = int(np.sqrt(field.shape[0]) + 0.5)
    for i in prange(h):
        for c in range(c_):
            for j in range(w):
                out[c, i, j] = 0.0
        for p in range(k):
            for q in range(k):
                t = p * k + q
                # the kernel row field[t, i, :] is reused for every channel
                for c in range(c_):
                    for j in range(w):
                        out[c, i, j] += field[t, i, j] * padded[c, i + p, j + q]


@njit(cache=True)
def filter_field_naive(padded, field, out):
    c_, h, w = out.shape
    k = int(np.sqrt(field.shape[0]) + 0.5)
    for c in range(c_):
        for i in range(h):
            for j in range(w):
                acc = np.float32(0.0)
                for p in range(k):
                    for q in range(k):
                        acc += field[p * k + q, i, j] * padded[c, i + p, j + q]
                out[c, i, j] = acc


@njit(cache=True)
def conv2d_naive(padded, weight, bias, stride, out):
    cout, ho, wo = out.shape
    cin = padded.shape[0]
    k = weight.shape[2]
    for co in range(cout):
        for i in range(ho):
            for j in range(wo):
                acc = np.float32(0.0)
                for ci in range(cin):
                    for ky in range(k):
                        for kx in range(k):
                            acc += weight[co, ci, ky, kx] * padded[ci, i * stride + ky, j * stride + kx]
                out[co, i, j] = acc + bias[co]


def set_workers(n):
    """Pin the number of threads used by the parallel kernels; returns the count in effect."""
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()
