"""Complex linear algebra: shifted sparse solves, Hermitian Jacobi, Aberth roots."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .errors import DegeneratePolynomialError, SolverError


def as_sparse(A) -> sp.csr_array:
    """Canonical complex CSR copy of ``A`` (sorted indices, no duplicates)."""
    out = sp.csr_array(A, dtype=complex)
    out.sum_duplicates()
    out.sort_indices()
    return out


def bandwidths(A) -> tuple[int, int]:
    """Lower and upper bandwidth of a sparse matrix."""
    coo = sp.coo_array(A)
    if coo.nnz == 0:
        return 0, 0
    off = coo.row.astype(np.int64) - coo.col.astype(np.int64)
    return int(max(off.max(), 0)), int(max(-off.min(), 0))


def _is_banded(n, kl, ku):
    return n <= 400 or (kl + ku) <= 4 * math.isqrt(n) + 16


class BandLU:
    """Partial-pivoting LU of a banded matrix, reusable across right-hand sides.

    Parameters
    ----------
    A : sparse matrix
        Square matrix; its band is extracted from the sparsity structure.
    backend : {"cython", "python"}, optional
        Force a kernel implementation; default is whatever imported.
    """

    def __init__(self, A, backend=None):
        A = sp.coo_array(A)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"matrix must be square, got {A.shape}")
        self.n = n
        self.kl, self.ku = bandwidths(A)
        if backend is None:
            self._factor, self._solve = _kernels.band_lu_factor, _kernels.band_lu_solve
        else:
            self._factor, self._solve = _kernels.get_backend(backend)
        d = 2 * self.kl + self.ku + 1
        lu = np.zeros((n, d), dtype=complex)
        np.add.at(lu, (A.col, self.kl + self.ku + A.row - A.col), A.data.astype(complex))
        self.piv, self.info = self._factor(lu, self.kl, self.ku)
        self.lu = lu

    @property
    def singular(self):
        return self.info != 0

    def solve(self, b):
        b = np.asarray(b, dtype=complex)
        x = np.array(b.reshape(self.n, -1), dtype=complex, order="C", copy=True)
        self._solve(self.lu, self.kl, self.ku, self.piv, x)
        return x.reshape(b.shape)


def _bicgstab(A, b, tol, maxiter, restarts=4):
    diag = A.diagonal()
    diag = np.where(diag == 0, 1.0, diag)
    precond = spla.LinearOperator(A.shape, matvec=lambda v: v / diag, dtype=complex)
    x = np.zeros_like(b)
    bnorm = np.linalg.norm(b)
    for _ in range(restarts):
        x, _info = spla.bicgstab(A, b, x0=x, rtol=tol, atol=0.0, maxiter=maxiter, M=precond)
        if np.linalg.norm(A @ x - b) <= tol * bnorm:
            break
    return x


class ShiftedSolver:
    """Factor ``A - shift*M`` once and solve for many right-hand sides.

    Every solve is residual-checked; one step of iterative refinement is
    attempted before a :class:`SolverError` is raised.
    """

    def __init__(self, A, M, shift, tol=1e-10, backend=None):
        A = as_sparse(A)
        M = as_sparse(M)
        if A.shape[0] != A.shape[1] or A.shape != M.shape:
            raise ValueError(f"A {A.shape} and M {M.shape} must be square and equal")
        self.shift = complex(shift)
        self.tol = tol
        self.matrix = as_sparse(A - self.shift * M)
        n = self.matrix.shape[0]
        kl, ku = bandwidths(self.matrix)
        self._lu = None
        if _is_banded(n, kl, ku):
            self._lu = BandLU(self.matrix, backend=backend)
            if self._lu.singular:
                raise SolverError(
                    f"singular band factorization at shift {self.shift}", shift=self.shift
                )

    @property
    def method(self):
        return "band-lu" if self._lu is not None else "bicgstab"

    def _raw_solve(self, b):
        if self._lu is not None:
            return self._lu.solve(b)
        n = self.matrix.shape[0]
        return _bicgstab(self.matrix, b, min(self.tol, 1e-12), 10 * n)

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=complex)
        if rhs.shape[0] != self.matrix.shape[0]:
            raise ValueError(f"rhs length {rhs.shape[0]} != matrix size {self.matrix.shape[0]}")
        bnorm = np.linalg.norm(rhs)
        if bnorm == 0.0:
            return np.zeros_like(rhs)
        x = self._raw_solve(rhs)
        res = rhs - self.matrix @ x
        rel = np.linalg.norm(res) / bnorm
        if not rel <= self.tol and np.isfinite(rel):
            x = x + self._raw_solve(res)
            rel = np.linalg.norm(rhs - self.matrix @ x) / bnorm
        if not rel <= self.tol:
            raise SolverError(
                f"shifted solve missed tolerance at shift {self.shift}: "
                f"relative residual {rel:.3e} > {self.tol:.1e}",
                residual=rel,
                shift=self.shift,
            )
        return x


def solve_shifted(A, M, shift, rhs, tol=1e-10):
    """Solve ``(A - shift*M) u = rhs`` with relative residual at most ``tol``."""
    return ShiftedSolver(A, M, shift, tol=tol).solve(rhs)


# --- Hermitian eigenproblem -------------------------------------------------

@dataclass(frozen=True)
class EigPair:
    value: float
    vector: np.ndarray
    gap: float


def normalize_phase(v):
    """Rotate ``v`` so its first largest-magnitude entry is real non-negative."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if v[k] == 0:
        return v.copy()
    return v * (np.conj(v[k]) / abs(v[k]))


def _jacobi_cs(app, aqq, mag):
    """Cosine and sine annihilating ``|a_pq| = mag`` in a real-diagonal 2x2 block."""
    diff = aqq - app
    if abs(diff) > 1e150 * mag:
        t = mag / diff
    else:
        theta = diff / (2.0 * mag)
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    return c, t * c


def jacobi_eigh(G, tol=1e-14, max_sweeps=100):
    """All eigenpairs of a Hermitian matrix by cyclic complex Jacobi rotations.

    The input is symmetrized as ``(G + G^H)/2``. Returns eigenvalues in
    ascending order and the unitary matrix of eigenvectors (columns).
    """
    A = np.array(G, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.conj().T)
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        w = A.diagonal().real.copy()
        order = np.argsort(w, kind="stable")
        return w[order], V[:, order]
    for _ in range(max_sweeps):
        off = math.sqrt(max(np.linalg.norm(A) ** 2 - np.linalg.norm(A.diagonal()) ** 2, 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-3 * tol * scale:
                    A[p, q] = A[q, p] = 0.0
                    continue
                e = apq / mag
                c, s = _jacobi_cs(A[p, p].real, A[q, q].real, mag)
                J = np.array([[c, s * e], [-s * np.conj(e), c]])
                cols = [p, q]
                A[:, cols] = A[:, cols] @ J
                A[cols, :] = J.conj().T @ A[cols, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, cols] = V[:, cols] @ J
    w = A.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def hermitian_smallest_eigpair(G) -> EigPair:
    """Smallest eigenvalue of a Hermitian matrix with its phase-normalized
    unit eigenvector and the gap to the next eigenvalue (``inf`` for 1x1)."""
    w, V = jacobi_eigh(G)
    v = V[:, 0]
    v = normalize_phase(v / np.linalg.norm(v))
    gap = float(w[1] - w[0]) if w.size > 1 else math.inf
    return EigPair(float(w[0]), v, gap)


def jacobi_svd(B, tol=1e-15, max_sweeps=100):
    """One-sided (Hestenes) Jacobi SVD of a tall matrix.

    Columns of ``B`` are rotated until mutually orthogonal; this is the
    two-sided Jacobi method applied implicitly to ``B^H B`` without ever
    forming it, so small singular values keep their relative accuracy.
    Returns singular values in ascending order and the matching right
    singular vectors (columns).
    """
    U = np.array(B, dtype=complex)
    if U.ndim != 2:
        raise ValueError("expected a 2-D array")
    n = U.shape[1]
    V = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = np.vdot(U[:, p], U[:, p]).real
                aqq = np.vdot(U[:, q], U[:, q]).real
                apq = np.vdot(U[:, p], U[:, q])
                mag = abs(apq)
                if mag < 1e-300 or mag <= tol * math.sqrt(app * aqq):
                    continue
                rotated = True
                e = apq / mag
                c, s = _jacobi_cs(app, aqq, mag)
                J = np.array([[c, s * e], [-s * np.conj(e), c]])
                cols = [p, q]
                U[:, cols] = U[:, cols] @ J
                V[:, cols] = V[:, cols] @ J
        if not rotated:
            break
    sv = np.linalg.norm(U, axis=0)
    order = np.argsort(sv, kind="stable")
    return sv[order], V[:, order]


def smallest_eigpair_from_factor(B) -> EigPair:
    """Smallest eigenpair of ``B^H B`` from the SVD of ``B``."""
    sv, V = jacobi_svd(B)
    v = normalize_phase(V[:, 0] / np.linalg.norm(V[:, 0]))
    gap = float(sv[1] ** 2 - sv[0] ** 2) if sv.size > 1 else math.inf
    return EigPair(float(sv[0] ** 2), v, gap)


# --- polynomials ------------------------------------------------------------

@dataclass(frozen=True)
class ShiftedPolynomial:
    """``q(z) = sum_a coeffs[a] * (z - center)**a``."""

    center: complex
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=complex))
        object.__setattr__(self, "center", complex(self.center))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, z):
        w = np.asarray(z, dtype=complex) - self.center
        out = np.zeros_like(w)
        for c in self.coeffs[::-1]:
            out = out * w + c
        return out

    def effective_coeffs(self, rtol=1e-14):
        c = self.coeffs
        big = np.max(np.abs(c)) if c.size else 0.0
        keep = np.nonzero(np.abs(c) > rtol * big)[0]
        if keep.size == 0:
            return c[:1]
        return c[: keep[-1] + 1]

    @classmethod
    def from_roots(cls, roots, center, lead=1.0):
        """Expand ``lead * prod(z - r)`` about ``center``."""
        c = np.array([lead], dtype=complex)
        for r in roots:
            # multiply by (w - (r - center)); ascending coefficients
            c = np.concatenate([[0.0], c]) - (complex(r) - complex(center)) * np.concatenate([c, [0.0]])
        return cls(center, c)


def _aberth(c, tol=1e-12, maxiter=200):
    d = len(c) - 1
    dc = c[1:] * np.arange(1, d + 1)
    radius = max(1.0, abs(c[0] / c[-1]) ** (1.0 / d))
    w = radius * np.exp(1j * (2 * np.pi * np.arange(d) / d + 0.4))

    def horner(coef, x):
        acc = 0j
        for a in coef[::-1]:
            acc = acc * x + a
        return acc

    for _ in range(maxiter):
        biggest = 0.0
        for k in range(d):
            pk = horner(c, w[k])
            if pk == 0:
                continue
            ratio = pk / horner(dc, w[k])
            diff = w[k] - np.delete(w, k)
            inv = np.sum(1.0 / diff) if d > 1 else 0.0
            step = ratio / (1.0 - ratio * inv)
            w[k] -= step
            biggest = max(biggest, abs(step) / max(1.0, abs(w[k])))
        if biggest <= tol:
            break
    # Newton polish, keeping the Aberth value if Newton diverges
    for k in range(d):
        for _ in range(3):
            dp = horner(dc, w[k])
            if dp == 0:
                break
            cand = w[k] - horner(c, w[k]) / dp
            if abs(horner(c, cand)) < abs(horner(c, w[k])):
                w[k] = cand
            else:
                break
    return w


def poly_roots(q: ShiftedPolynomial, tol=1e-12, maxiter=200):
    """Roots of a shifted polynomial in global coordinates, nearest-center first.

    Trailing coefficients below ``1e-14 * max|coeff|`` are trimmed before the
    Aberth-Ehrlich iteration, which runs in the shifted variable ``z - center``.
    """
    c = q.effective_coeffs()
    if len(c) < 2:
        raise DegeneratePolynomialError("polynomial has effective degree 0")
    w = _aberth(np.array(c, dtype=complex), tol=tol, maxiter=maxiter)
    w = w[np.argsort(np.abs(w), kind="stable")]
    return q.center + w
