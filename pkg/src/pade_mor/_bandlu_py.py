"""Pure-Python (numpy) twin of the compiled banded LU kernels.

Same storage layout and pivot sequence as ``_bandlu.pyx``; each elimination
step is vectorised over the band instead of looping over scalars.
"""

import numpy as np


def band_lu_factor(lu, kl, ku):
    n = lu.shape[0]
    d = kl + ku
    piv = np.empty(n, dtype=np.intp)
    info = 0
    ju = 0
    for j in range(n):
        km = min(kl, n - 1 - j)
        col = lu[j, d:d + km + 1]
        mag = col.real * col.real + col.imag * col.imag
        p = int(np.argmax(mag))
        piv[j] = j + p
        if mag[p] == 0.0:
            if info == 0:
                info = j + 1
            continue
        ju = max(ju, min(j + ku + p, n - 1))
        cs = np.arange(j, ju + 1)
        if p != 0:
            a = lu[cs, d + j - cs].copy()
            lu[cs, d + j - cs] = lu[cs, d + j + p - cs]
            lu[cs, d + j + p - cs] = a
        if km == 0:
            continue
        lu[j, d + 1:d + km + 1] /= lu[j, d]
        cs = cs[1:]
        if cs.size == 0:
            continue
        urow = lu[cs, d + j - cs]
        ks = np.arange(1, km + 1)
        idx = d + j + ks[None, :] - cs[:, None]
        lu[cs[:, None], idx] -= urow[:, None] * lu[j, d + 1:d + km + 1][None, :]
    return piv, info


def band_lu_solve(lu, kl, ku, ipiv, b):
    n = lu.shape[0]
    d = kl + ku
    for j in range(n):
        km = min(kl, n - 1 - j)
        p = ipiv[j]
        if p != j:
            tmp = b[j].copy()
            b[j] = b[p]
            b[p] = tmp
        if km:
            b[j + 1:j + km + 1] -= lu[j, d + 1:d + km + 1, None] * b[j][None, :]
    for j in range(n - 1, -1, -1):
        b[j] /= lu[j, d]
        i0 = max(0, j - d)
        if i0 < j:
            b[i0:j] -= lu[j, d + i0 - j:d, None] * b[j][None, :]
