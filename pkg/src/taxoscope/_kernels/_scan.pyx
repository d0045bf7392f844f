# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled longest-match scan; keep in lockstep with pyscan.scan."""

import array as _array


def scan(token_ids, dict first_index, form_flat, form_off):
    """See taxoscope._kernels.pyscan.scan for the contract."""
    if not isinstance(token_ids, _array.array):
        token_ids = _array.array("i", token_ids)
    cdef const int[:] toks = token_ids
    cdef const int[:] flat = form_flat
    cdef const int[:] off = form_off
    cdef Py_ssize_t n = toks.shape[0]
    cdef Py_ssize_t i = 0, k, a, flen, best_len
    cdef Py_ssize_t fidx
    cdef bint ok
    out = []
    while i < n:
        candidates = first_index.get(toks[i])
        if candidates is not None:
            best_len = 0
            for fidx in candidates:
                a = off[fidx]
                flen = off[fidx + 1] - a
                if best_len and flen < best_len:
                    break
                if flen > n - i:
                    continue
                ok = True
                for k in range(flen):
                    if flat[a + k] != toks[i + k]:
                        ok = False
                        break
                if ok:
                    if best_len == 0:
                        best_len = flen
                    out.append((i, fidx))
            if best_len:
                i += best_len
                continue
        i += 1
    return out
