# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-outer-product summary update.

Mirrors the pure Python composition in skewprod.kernels exactly: same rank
selection (float-bit bisection), same sweep, same merge arithmetic, so both
backends produce bit-identical summaries.  Tie padding at the cutoff is
skipped here because those entries carry weight zero after the decrement and
never reach the summary.
"""

import numpy as np

cimport numpy as cnp
from libc.string cimport memcpy

cnp.import_array()


cdef inline double _bits_to_double(long long b) noexcept nogil:
    cdef double out
    memcpy(&out, &b, 8)
    return out


cdef inline long long _double_to_bits(double x) noexcept nogil:
    cdef long long out
    memcpy(&out, &x, 8)
    return out


cdef long long _count_ge(const double[::1] u, const double[::1] v, double x) noexcept nogil:
    cdef Py_ssize_t j = v.shape[0]
    cdef Py_ssize_t q
    cdef long long cnt = 0
    for q in range(u.shape[0]):
        while j > 0 and not (u[q] * v[j - 1] >= x):
            j -= 1
        if j == 0:
            break
        cnt += j
    return cnt


cdef long long _count_pos(const double[::1] u, const double[::1] v) noexcept nogil:
    cdef Py_ssize_t j = v.shape[0]
    cdef Py_ssize_t q
    cdef long long cnt = 0
    for q in range(u.shape[0]):
        while j > 0 and not (u[q] * v[j - 1] > 0.0):
            j -= 1
        if j == 0:
            break
        cnt += j
    return cnt


cdef double _select_rank(const double[::1] u, const double[::1] v, long long r) noexcept nogil:
    """r-th largest pairwise product via bisection over positive double bits."""
    cdef long long total = _count_pos(u, v)
    cdef long long lo, hi, mid
    if r > total:
        return 0.0
    lo = 1
    hi = _double_to_bits(u[0] * v[0])
    while lo < hi:
        mid = lo + (hi - lo + 1) / 2
        if _count_ge(u, v, _bits_to_double(mid)) >= r:
            lo = mid
        else:
            hi = mid - 1
    return _bits_to_double(lo)


def outer_step(long long[::1] keys, double[::1] cnts,
               long long[::1] skeys, double[::1] scnts,
               long long size, long long b, long long n,
               object u_vals, object u_pos, object v_vals, object v_pos,
               bint want_stats):
    """One Frequent step; returns (new_size, cutoff, touched, wprime, union)."""
    u_order = np.lexsort((u_pos, -u_vals))
    v_order = np.lexsort((v_pos, -v_vals))
    cdef double[::1] uv = np.ascontiguousarray(u_vals[u_order])
    cdef long long[::1] up = np.ascontiguousarray(u_pos[u_order])
    cdef double[::1] vv = np.ascontiguousarray(v_vals[v_order])
    cdef long long[::1] vp = np.ascontiguousarray(v_pos[v_order])

    cdef Py_ssize_t nu = uv.shape[0]
    cdef Py_ssize_t nv = vv.shape[0]
    if nu == 0 or nv == 0:
        return int(size), 0.0, 0, 0.0, int(size)

    cdef double cutoff = _select_rank(uv, vv, b + 1)
    cdef long long touched = 0
    if want_stats and cutoff > 0.0:
        touched = _count_pos(uv, vv)

    # strict cover: per-row counts of products > cutoff (nonincreasing)
    entry_keys_arr = np.empty(b, dtype=np.int64)
    entry_wts_arr = np.empty(b, dtype=np.float64)
    cdef long long[::1] e_keys = entry_keys_arr
    cdef double[::1] e_wts = entry_wts_arr
    cdef Py_ssize_t j_gt = nv
    cdef Py_ssize_t q, col
    cdef Py_ssize_t m = 0
    cdef double w
    with nogil:
        for q in range(nu):
            while j_gt > 0 and not (uv[q] * vv[j_gt - 1] > cutoff):
                j_gt -= 1
            if j_gt == 0:
                break
            for col in range(j_gt):
                w = uv[q] * vv[col] - cutoff
                if w > 0.0:
                    e_keys[m] = up[q] * n + vp[col]
                    e_wts[m] = w
                    m += 1

    # merge-scan with the summary, position order on both sides
    order = np.argsort(entry_keys_arr[:m])
    cdef long long[::1] eorder = np.ascontiguousarray(order, dtype=np.int64)
    cdef Py_ssize_t si = 0, ei = 0, out = 0
    cdef long long ek
    with nogil:
        while si < size and ei < m:
            ek = e_keys[eorder[ei]]
            if keys[si] < ek:
                skeys[out] = keys[si]
                scnts[out] = cnts[si]
                si += 1
            elif keys[si] > ek:
                skeys[out] = ek
                scnts[out] = e_wts[eorder[ei]]
                ei += 1
            else:
                skeys[out] = ek
                scnts[out] = cnts[si] + e_wts[eorder[ei]]
                si += 1
                ei += 1
            out += 1
        while si < size:
            skeys[out] = keys[si]
            scnts[out] = cnts[si]
            si += 1
            out += 1
        while ei < m:
            skeys[out] = e_keys[eorder[ei]]
            scnts[out] = e_wts[eorder[ei]]
            ei += 1
            out += 1

    cdef double wprime = 0.0
    cdef Py_ssize_t kept = 0, t
    if out > b:
        union = np.asarray(scnts[:out]).copy()
        wprime = float(np.partition(union, out - b - 1)[out - b - 1])
        with nogil:
            for t in range(out):
                w = scnts[t] - wprime
                if w > 0.0:
                    keys[kept] = skeys[t]
                    cnts[kept] = w
                    kept += 1
    else:
        with nogil:
            for t in range(out):
                keys[t] = skeys[t]
                cnts[t] = scnts[t]
        kept = out

    return int(kept), float(cutoff), int(touched), float(wprime), int(out)
