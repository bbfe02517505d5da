# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled k-mer counting kernel.

Counts overlapping k-mers for a batch of equal-length encoded sequences
(uint8 codes, A=0..T=3) using a rolling base-4 window.  Must stay
count-for-count identical to the numpy implementation in _kmer_py.py.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def kmer_counts(const unsigned char[:, ::1] codes, int k):
    """int64 count matrix (n_sequences, 4**k) of overlapping k-mer counts."""
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t length = codes.shape[1]
    cdef long long vocab = 1
    cdef int t
    for t in range(k):
        vocab *= 4
    out_arr = np.zeros((n, vocab), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    if length < k:
        return out_arr
    cdef long long idx, high
    high = vocab // 4
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            idx = 0
            for j in range(k - 1):
                idx = idx * 4 + codes[i, j]
            for j in range(k - 1, length):
                idx = (idx % high) * 4 + codes[i, j]
                out[i, idx] += 1
    return out_arr
