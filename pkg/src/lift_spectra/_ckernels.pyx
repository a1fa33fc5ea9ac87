# cython: language_level=3
"""Compiled versions of the kernels in ``_pykernels``.

Semantics (including floating-point summation order and tie-breaking) are
identical to the numpy fallback; the test-suite checks bit equality.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

BACKEND = "cython"

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL


cdef inline uint64_t fmix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


def permutation(key, Py_ssize_t n):
    cdef uint64_t k = <uint64_t>(int(key) & 0xFFFFFFFFFFFFFFFF)
    cdef cnp.ndarray[int64_t, ndim=1] out = np.arange(n, dtype=np.int64)
    cdef int64_t[::1] perm = out
    cdef uint64_t counter = 0, r, bound, floor
    cdef Py_ssize_t i, j
    cdef int64_t tmp
    with nogil:
        i = n - 1
        while i > 0:
            bound = <uint64_t>(i + 1)
            floor = (0 - bound) % bound
            while True:
                counter += 1
                r = fmix64(k + GOLDEN * counter)
                if r >= floor:
                    break
            j = <Py_ssize_t>(r % bound)
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp
            i -= 1
    return out


def adjacency_apply(const int64_t[:, ::1] src, const int64_t[:, ::1] dst, x):
    cdef cnp.ndarray xa = np.ascontiguousarray(x, dtype=np.float64)
    one_d = xa.ndim == 1
    if one_d:
        xa = xa.reshape(-1, 1)
    cdef const double[:, ::1] xv = xa
    cdef cnp.ndarray ya = np.zeros((xa.shape[0], xa.shape[1]), dtype=np.float64)
    cdef double[:, ::1] yv = ya
    cdef Py_ssize_t E = src.shape[0], n = src.shape[1], b = xv.shape[1]
    cdef Py_ssize_t e, i, c
    cdef int64_t a, t
    with nogil:
        for e in range(E):
            for i in range(n):
                a = src[e, i]
                t = dst[e, i]
                for c in range(b):
                    yv[a, c] += xv[t, c]
            for i in range(n):
                a = src[e, i]
                t = dst[e, i]
                for c in range(b):
                    yv[t, c] += xv[a, c]
    if one_d:
        return ya.reshape(-1)
    return ya


def cheeger_min(Py_ssize_t m, eu, ev):
    """Gray-code enumeration of subsets avoiding vertex m-1."""
    cdef cnp.ndarray[int64_t, ndim=1] u_arr = np.ascontiguousarray(eu, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] v_arr = np.ascontiguousarray(ev, dtype=np.int64)
    cdef Py_ssize_t E = u_arr.shape[0]
    # CSR incidence lists (each non-loop edge appears at both endpoints)
    deg = np.zeros(m + 1, dtype=np.int64)
    np.add.at(deg, u_arr + 1, 1)
    np.add.at(deg, v_arr + 1, 1)
    cdef cnp.ndarray[int64_t, ndim=1] ptr = np.cumsum(deg)
    cdef cnp.ndarray[int64_t, ndim=1] nbr = np.empty(2 * E, dtype=np.int64)
    fill = ptr[:-1].copy()
    for e in range(E):
        nbr[fill[u_arr[e]]] = v_arr[e]
        fill[u_arr[e]] += 1
        nbr[fill[v_arr[e]]] = u_arr[e]
        fill[v_arr[e]] += 1
    cdef int64_t[::1] p = ptr
    cdef int64_t[::1] nb = nbr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ins_arr = np.zeros(m, dtype=np.uint8)
    cdef cnp.uint8_t[::1] ins = ins_arr
    cdef uint64_t total = (<uint64_t>1) << (m - 1)
    cdef uint64_t i, gray = 0, best_mask = 0
    cdef int64_t boundary = 0, size = 0, small, best_b = -1, best_s = 1
    cdef Py_ssize_t v, q
    with nogil:
        i = 1
        while i < total:
            v = 0
            while not ((i >> v) & 1):
                v += 1
            for q in range(p[v], p[v + 1]):
                if ins[nb[q]] == ins[v]:
                    boundary += 1
                else:
                    boundary -= 1
            ins[v] ^= 1
            gray ^= (<uint64_t>1) << v
            size += 1 if ins[v] else -1
            small = size if size < m - size else m - size
            if best_b < 0 or boundary * best_s < best_b * small or (
                boundary * best_s == best_b * small and gray < best_mask
            ):
                best_b = boundary
                best_s = small
                best_mask = gray
            i += 1
    return int(best_b), int(best_s), int(best_mask)
