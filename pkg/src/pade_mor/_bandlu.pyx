# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled banded LU kernels (partial pivoting, LAPACK gbtrf/gbtrs layout).

Storage is column-major-by-row: ``lu[j, kl + ku + i - j]`` holds entry
``(i, j)``; the first ``kl`` slots of every row are fill-in space for row
interchanges.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def band_lu_factor(double complex[:, ::1] lu, Py_ssize_t kl, Py_ssize_t ku):
    """Factor ``lu`` in place. Returns ``(piv, info)``; ``info > 0`` flags a
    zero pivot at column ``info - 1``."""
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t d = kl + ku
    cdef Py_ssize_t j, k, c, p, km, ju = 0, info = 0
    cdef double best, cur
    cdef double complex piv_val, a, tmp
    piv = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] ipiv = piv

    with nogil:
        for j in range(n):
            km = kl if kl < n - 1 - j else n - 1 - j
            p = 0
            best = _abs2(lu[j, d])
            for k in range(1, km + 1):
                cur = _abs2(lu[j, d + k])
                if cur > best:
                    best = cur
                    p = k
            ipiv[j] = j + p
            if best == 0.0:
                if info == 0:
                    info = j + 1
                continue
            c = j + ku + p
            if c > n - 1:
                c = n - 1
            if c > ju:
                ju = c
            if p != 0:
                for c in range(j, ju + 1):
                    tmp = lu[c, d + j - c]
                    lu[c, d + j - c] = lu[c, d + j + p - c]
                    lu[c, d + j + p - c] = tmp
            piv_val = lu[j, d]
            for k in range(1, km + 1):
                lu[j, d + k] = lu[j, d + k] / piv_val
            for c in range(j + 1, ju + 1):
                a = lu[c, d + j - c]
                if a.real != 0.0 or a.imag != 0.0:
                    for k in range(1, km + 1):
                        lu[c, d + j + k - c] = lu[c, d + j + k - c] - lu[j, d + k] * a
    return piv, info


def band_lu_solve(const double complex[:, ::1] lu, Py_ssize_t kl, Py_ssize_t ku,
                  const Py_ssize_t[::1] ipiv, double complex[:, ::1] b):
    """Overwrite ``b`` (shape ``(n, nrhs)``) with the solution."""
    cdef Py_ssize_t n = lu.shape[0]
    cdef Py_ssize_t nrhs = b.shape[1]
    cdef Py_ssize_t d = kl + ku
    cdef Py_ssize_t j, k, p, r, i, i0, km
    cdef double complex t, tmp

    with nogil:
        for j in range(n):
            km = kl if kl < n - 1 - j else n - 1 - j
            p = ipiv[j]
            if p != j:
                for r in range(nrhs):
                    tmp = b[j, r]
                    b[j, r] = b[p, r]
                    b[p, r] = tmp
            for k in range(1, km + 1):
                for r in range(nrhs):
                    b[j + k, r] = b[j + k, r] - lu[j, d + k] * b[j, r]
        for j in range(n - 1, -1, -1):
            i0 = j - d
            if i0 < 0:
                i0 = 0
            for r in range(nrhs):
                t = b[j, r] / lu[j, d]
                b[j, r] = t
                for i in range(i0, j):
                    b[i, r] = b[i, r] - lu[j, d + i - j] * t
