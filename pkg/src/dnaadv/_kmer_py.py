"""Numpy fallback for the k-mer counting kernel.

Used when the compiled extension is unavailable (or disabled via
DNAADV_NO_EXT=1).  Produces bit-identical counts to _kmercore.
"""

import numpy as np


def kmer_counts(codes: np.ndarray, k: int) -> np.ndarray:
    """int64 count matrix (n_sequences, 4**k) of overlapping k-mer counts."""
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    n, length = codes.shape
    vocab = 4 ** k
    if length < k:
        return np.zeros((n, vocab), dtype=np.int64)
    windows = length - k + 1
    idx = np.zeros((n, windows), dtype=np.int64)
    for j in range(k):
        idx *= 4
        idx += codes[:, j:j + windows]
    flat = idx + (np.arange(n, dtype=np.int64) * vocab)[:, None]
    counts = np.bincount(flat.ravel(), minlength=n * vocab)
    return counts.reshape(n, vocab)
