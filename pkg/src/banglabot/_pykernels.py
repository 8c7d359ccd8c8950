"""Pure numpy/scipy implementations of the training hot-loop kernels.

This is the fallback backend used when the compiled extension is not built.
Each function mirrors the signature and semantics of its `_ckernels` twin.
The Adam update is bit-identical between backends (same per-element operation
order, no FMA); the CSR products may differ in the last few ulps because
scipy's summation order is its own.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse as _sp

NAME = "pure"


def adam_step(p, g, m, v, t, lr, beta1, beta2, eps):
    """One in-place Adam update on flat float64 arrays.

    m and v are the running first/second moment estimates, t the 1-based
    step count used for bias correction.
    """
    m *= beta1
    m += (1.0 - beta1) * g
    v *= beta2
    v += (1.0 - beta2) * (g * g)
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    mhat = m / bc1
    vhat = v / bc2
    p -= lr * mhat / (np.sqrt(vhat) + eps)


def csr_dense_matmul(indptr, indices, data, w, out):
    """out[r, :] = sum_k data[k] * w[indices[k], :] for k in row r."""
    n_rows = indptr.shape[0] - 1
    x = _sp.csr_matrix((data, indices, indptr), shape=(n_rows, w.shape[0]))
    np.copyto(out, x @ w)


def csr_t_dense_accum(indptr, indices, data, grad_out, grad_w):
    """grad_w[indices[k], :] += data[k] * grad_out[r, :] (transpose product)."""
    n_rows = indptr.shape[0] - 1
    x = _sp.csr_matrix((data, indices, indptr), shape=(n_rows, grad_w.shape[0]))
    grad_w += x.T @ grad_out
