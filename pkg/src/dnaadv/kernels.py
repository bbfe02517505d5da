"""Kernel backend selection.

Prefers the compiled extension and falls back to the numpy implementation
when the extension is missing or DNAADV_NO_EXT=1 is set.  Both backends
return identical integer count matrices, so everything downstream is
backend-independent bit for bit.
"""

import os

from . import _kmer_py

if os.environ.get("DNAADV_NO_EXT", "") not in ("", "0"):
    _impl = _kmer_py
    BACKEND = "numpy"
else:
    try:
        from . import _kmercore as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kmer_py
        BACKEND = "numpy"

kmer_counts = _impl.kmer_counts


def backend_name() -> str:
    return BACKEND
