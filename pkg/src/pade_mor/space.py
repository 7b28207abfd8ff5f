"""Discrete weighted H1 inner-product spaces.

Vectors are plain complex arrays of nodal values; a :class:`WeightedSpace`
carries the matrices that turn them into norms:

    ||v||_w^2 = v^H (stiffness + weight^2 * mass) v
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .linalg import as_sparse


class WeightedSpace:
    """Inner-product context for nodal vectors.

    Parameters
    ----------
    stiffness : sparse matrix
        Discrete ``int grad u . conj(grad v)``; Hermitian positive semidefinite.
    mass : sparse matrix
        Discrete ``int u conj(v)``; Hermitian positive definite.
    weight : float
        The ``w`` in ``||grad v||^2 + w^2 ||v||^2``.
    boundary_mass : sparse matrix, optional
        Discrete ``int_{Gamma_R} u conj(v)``; carried for impedance problems.
    """

    def __init__(self, stiffness, mass, weight, boundary_mass=None):
        if not weight > 0:
            raise ValueError(f"weight must be positive, got {weight}")
        self.stiffness = as_sparse(stiffness)
        self.mass = as_sparse(mass)
        n = self.stiffness.shape[0]
        if self.stiffness.shape != (n, n) or self.mass.shape != (n, n):
            raise ValueError("stiffness and mass must be square and of equal size")
        self.boundary_mass = None if boundary_mass is None else as_sparse(boundary_mass)
        if self.boundary_mass is not None and self.boundary_mass.shape != (n, n):
            raise ValueError("boundary_mass has the wrong size")
        self.weight = float(weight)
        self.gram_operator = as_sparse(self.stiffness + self.weight**2 * self.mass)

    @property
    def dim(self):
        return self.stiffness.shape[0]

    def with_weight(self, weight):
        return WeightedSpace(self.stiffness, self.mass, weight, self.boundary_mass)

    def check(self, u):
        u = np.asarray(u)
        if u.shape[-1] != self.dim:
            raise ValueError(f"vector length {u.shape[-1]} does not match space dimension {self.dim}")
        return u

    def inner(self, u, v):
        """``v^H W u``: linear in ``u``, conjugate-linear in ``v``."""
        u = self.check(u)
        v = self.check(v)
        return complex(np.vdot(v, self.gram_operator @ u))

    def norm(self, u):
        u = self.check(u)
        return float(np.sqrt(max(np.vdot(u, self.gram_operator @ u).real, 0.0)))

    def norms(self, U):
        """Row-wise norms of a stack of vectors, shape ``(k, n)``."""
        U = np.atleast_2d(self.check(U))
        WU = (self.gram_operator @ U.T).T
        return np.sqrt(np.maximum(np.einsum("ij,ij->i", U.conj(), WU).real, 0.0))

    def gram(self, U):
        """``H[a, b] = U[a]^H W U[b]`` for the rows of ``U``."""
        U = np.atleast_2d(self.check(U))
        H = U.conj() @ (self.gram_operator @ U.T)
        return 0.5 * (H + H.conj().T)

    def orthonormal_basis(self, U):
        """W-orthonormal basis ``Q`` (rows) and ``R`` with ``U = R^T Q``.

        Classical Gram-Schmidt applied twice; vectors that vanish to
        round-off are dropped.
        """
        U = np.atleast_2d(self.check(U)).astype(complex)
        k = U.shape[0]
        Q = []
        R = np.zeros((k, k), dtype=complex)
        scale = max(self.norms(U).max(initial=0.0), 1e-300)
        for a in range(k):
            v = U[a].copy()
            coeff = np.zeros(len(Q), dtype=complex)
            for _ in range(2):
                if Q:
                    Qm = np.array(Q)
                    c = Qm.conj() @ (self.gram_operator @ v)
                    v = v - c @ Qm
                    coeff += c
            nv = self.norm(v)
            R[: len(Q), a] = coeff
            if nv > 1e-14 * scale:
                R[len(Q), a] = nv
                Q.append(v / nv)
        r = len(Q)
        Qm = np.array(Q) if Q else np.zeros((0, self.dim), dtype=complex)
        return Qm, R[:r]


def diagonal_space(diag_stiffness, weight, diag_mass=None):
    """Space with diagonal matrices: modal coordinates of an orthonormal basis."""
    k = np.asarray(diag_stiffness, dtype=float)
    m = np.ones_like(k) if diag_mass is None else np.asarray(diag_mass, dtype=float)
    return WeightedSpace(sp.diags(k), sp.diags(m), weight)
