# Compiled twins of the _pykernels functions.  Keep both files in sync:
# same signatures, same per-element operation order in adam_step.

import numpy as np

from libc.math cimport sqrt

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"


def adam_step(cnp.float64_t[::1] p not None,
              cnp.float64_t[::1] g not None,
              cnp.float64_t[::1] m not None,
              cnp.float64_t[::1] v not None,
              long t, double lr, double beta1, double beta2, double eps):
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double one_m_b1 = 1.0 - beta1
    cdef double one_m_b2 = 1.0 - beta2
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    cdef double gi, mhat, vhat
    for i in range(n):
        gi = g[i]
        m[i] = beta1 * m[i] + one_m_b1 * gi
        v[i] = beta2 * v[i] + one_m_b2 * (gi * gi)
        mhat = m[i] / bc1
        vhat = v[i] / bc2
        p[i] = p[i] - lr * mhat / (sqrt(vhat) + eps)


def csr_dense_matmul(cnp.int64_t[::1] indptr not None,
                     cnp.int64_t[::1] indices not None,
                     cnp.float64_t[::1] data not None,
                     cnp.float64_t[:, ::1] w not None,
                     cnp.float64_t[:, ::1] out not None):
    cdef Py_ssize_t r, k, j
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t dim = w.shape[1]
    cdef double val
    cdef cnp.int64_t row
    for r in range(n_rows):
        for j in range(dim):
            out[r, j] = 0.0
        for k in range(indptr[r], indptr[r + 1]):
            row = indices[k]
            val = data[k]
            for j in range(dim):
                out[r, j] += val * w[row, j]


def csr_t_dense_accum(cnp.int64_t[::1] indptr not None,
                      cnp.int64_t[::1] indices not None,
                      cnp.float64_t[::1] data not None,
                      cnp.float64_t[:, ::1] grad_out not None,
                      cnp.float64_t[:, ::1] grad_w not None):
    cdef Py_ssize_t r, k, j
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t dim = grad_w.shape[1]
    cdef double val
    cdef cnp.int64_t row
    for r in range(n_rows):
        for k in range(indptr[r], indptr[r + 1]):
            row = indices[k]
            val = data[k]
            for j in range(dim):
                grad_w[row, j] += val * grad_out[r, j]
