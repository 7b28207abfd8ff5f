"""Frequency-response maps and their Taylor coefficients at a center ``z0``.

Every map exposes ``taylor(beta)`` (cached, computed recursively with one
factorization of the shifted operator), ``taylor_coefficients(E)`` and
``evaluate(z)`` for reference solutions.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import PoleAtCenterError
from .grid import Grid
from .linalg import ShiftedSolver, as_sparse
from .space import WeightedSpace, diagonal_space


def fd_eigenvalue(m, n, h):
    """Eigenvalue of the 5-point Dirichlet Laplacian on ``(0, pi)^2`` for mode ``(m, n)``."""
    return 4.0 / h**2 * (math.sin(m * h / 2) ** 2 + math.sin(n * h / 2) ** 2)


def fd_dirichlet_mode(grid: Grid, m, n):
    """Discrete sine mode on ``(0, pi)^2``, unit norm in the lumped mass."""
    v = np.sin(m * grid.x) * np.sin(n * grid.y)
    v[grid.dirichlet] = 0.0
    return v / math.sqrt(v @ (grid.mass_diag * v))


class ResponseMap:
    """Shared Taylor cache; subclasses implement ``_next_coefficient``."""

    def __init__(self, space: WeightedSpace, z0):
        self.space = space
        self.z0 = complex(z0)
        if not self.z0.real > 0:
            raise ValueError(f"center must have positive real part, got {self.z0}")
        self._taylor = []

    @property
    def dim(self):
        return self.space.dim

    def taylor(self, beta):
        if beta < 0:
            return np.zeros(self.dim, dtype=complex)
        while len(self._taylor) <= beta:
            self._taylor.append(self._next_coefficient(len(self._taylor)))
        return self._taylor[beta]

    def taylor_coefficients(self, E):
        """Array of shape ``(E + 1, dim)`` holding ``S_0 .. S_E``."""
        self.taylor(E)
        return np.array(self._taylor[: E + 1])

    def _next_coefficient(self, beta):
        raise NotImplementedError

    def evaluate(self, z):
        raise NotImplementedError

    def evaluate_many(self, zs):
        return np.array([self.evaluate(z) for z in np.atleast_1d(zs)])

    def norms(self, zs):
        """Weighted norms of ``S(z)`` for an array of points."""
        return self.space.norms(self.evaluate_many(zs))


class ModalOracle(ResponseMap):
    """Response map given by a finite eigen-expansion.

    Load-driven: ``S(z) = sum_j loads[j] / (poles[j] - z) * modes[j]``.
    Lifting-driven (``lifting`` given): ``S(z) = sum_j z loads[j] / (poles[j] - z) * modes[j] + lifting``.
    ``modes=None`` means the coordinate vectors of the space itself.
    """

    def __init__(self, space, poles, modes, loads, z0, lifting=None):
        super().__init__(space, z0)
        self.poles = np.asarray(poles, dtype=float)
        self.loads = np.asarray(loads, dtype=complex)
        if modes is None:
            if space.dim != len(self.poles):
                raise ValueError("coordinate modes need one pole per space dimension")
            self.modes = None
        else:
            self.modes = np.atleast_2d(np.asarray(modes, dtype=complex))
            space.check(self.modes)
            if len(self.modes) != len(self.poles):
                raise ValueError("poles, modes and loads must have equal length")
        if len(self.loads) != len(self.poles):
            raise ValueError("poles, modes and loads must have equal length")
        self.lifting = None if lifting is None else space.check(np.asarray(lifting, dtype=complex))
        gap = np.abs(self.poles - self.z0)
        if gap.size and gap.min() <= 1e-14 * max(1.0, abs(self.z0)):
            raise PoleAtCenterError(f"center {self.z0} coincides with a pole")
        self._c = self.poles - self.z0
        self._setup_norms()

    def _vectors(self):
        modes = np.eye(self.dim, dtype=complex) if self.modes is None else self.modes
        return modes if self.lifting is None else np.vstack([modes, self.lifting])

    def _setup_norms(self):
        W = self.space.gram_operator
        if self.modes is None and self.lifting is None and W.nnz == np.count_nonzero(W.diagonal()):
            self._diag_gram, self._R = W.diagonal().real.copy(), None
            return
        vecs = self._vectors()
        H = self.space.gram(vecs)
        d = H.diagonal().real.copy()
        if np.array_equal(H, np.diag(d)):
            # orthogonal vectors: the norm is a positive weighted sum
            self._diag_gram, self._R = d, None
        else:
            self._diag_gram = None
            _, self._R = self.space.orthonormal_basis(vecs)

    def _combine(self, coef):
        return coef if self.modes is None else coef @ self.modes

    def _next_coefficient(self, beta):
        c = self._c
        if self.lifting is None:
            return self._combine(self.loads * c ** (-(beta + 1)))
        if beta == 0:
            return self._combine(self.z0 * self.loads / c) + self.lifting
        # Taylor of z/(lam - z) about z0, order >= 1
        return self._combine(self.poles * self.loads * c ** (-(beta + 1)))

    def coefficients(self, zs):
        """Expansion coefficients per point, shape ``(len(zs), n_vectors)``."""
        z = np.atleast_1d(np.asarray(zs, dtype=complex))[:, None]
        coef = self.loads[None, :] / (self.poles[None, :] - z)
        if self.lifting is None:
            return coef
        return np.hstack([z * coef, np.ones((z.shape[0], 1))])

    def evaluate(self, z):
        c = self.coefficients([z])[0]
        if self.lifting is None:
            return self._combine(c)
        return self._combine(c[:-1]) + self.lifting

    def norms(self, zs, chunk=4096):
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        out = np.empty(zs.shape[0])
        for s in range(0, zs.shape[0], chunk):
            C = self.coefficients(zs[s:s + chunk])
            if self._R is None:
                out[s:s + chunk] = np.sqrt((C.real**2 + C.imag**2) @ self._diag_gram)
            else:
                out[s:s + chunk] = np.linalg.norm(C @ self._R.T, axis=1)
        return out

    def sorted_poles(self):
        """Distinct poles ordered by distance from the center."""
        p = np.unique(self.poles[np.abs(self.loads) > 0])
        return p[np.argsort(np.abs(p - self.z0), kind="stable")]


def spectral_oracle(poles, loads, z0, weight=None, stiffness=None):
    """Modal oracle in its own modal coordinates.

    Modes are unit vectors of a diagonal space whose stiffness defaults to the
    poles (``||grad phi_j||^2 = lambda_j`` for L2-normalised eigenfunctions).
    """
    poles = np.asarray(poles, dtype=float)
    z0 = complex(z0)
    weight = math.sqrt(z0.real) if weight is None else weight
    kdiag = poles if stiffness is None else np.asarray(stiffness, dtype=float)
    space = diagonal_space(kdiag, weight)
    return ModalOracle(space, poles, None, loads, z0)


def dirichlet_square_oracle(z0, cutoff=40, weight=None):
    """Continuous Dirichlet Laplacian on ``(0, pi)^2`` with load ``f(x, y) = x y``.

    Eigenfunctions ``(2/pi) sin(m x) sin(n y)`` with eigenvalues ``m^2 + n^2``;
    the load coefficients are ``2 pi (-1)^(m+n) / (m n)``. Modes with
    ``m, n <= cutoff`` are kept.
    """
    m, n = np.meshgrid(np.arange(1, cutoff + 1), np.arange(1, cutoff + 1), indexing="ij")
    m, n = m.ravel(), n.ravel()
    poles = (m**2 + n**2).astype(float)
    loads = 2 * np.pi * (-1.0) ** (m + n) / (m * n)
    oracle = spectral_oracle(poles, loads, z0, weight)
    oracle.mode_indices = np.stack([m, n], axis=1)
    return oracle


class FdHelmholtzMap(ResponseMap):
    """Finite-difference Helmholtz map ``-Lap u - z eps^2 u = f`` with Dirichlet lifting.

    With lifting data ``g_D`` the unknown is split as ``u = u0 + w_g`` where
    ``w_g`` is the discrete harmonic extension, so that
    ``(K - z M_eps) u0 = M f + z M_eps w_g`` on free nodes. In both cases
    ``(K - z0 M_eps) S_beta = M_eps S_{beta-1}`` for ``beta >= 1``.
    """

    def __init__(self, grid: Grid, z0, load=None, eps2=None, g_dirichlet=None, weight=None):
        z0 = complex(z0)
        weight = math.sqrt(z0.real) if weight is None else weight
        space = WeightedSpace(grid.stiffness, grid.mass, weight)
        super().__init__(space, z0)
        self.grid = grid
        n = grid.n_nodes
        self.eps2 = np.ones(n) if eps2 is None else np.asarray(eps2, dtype=float) * np.ones(n)
        if np.any(self.eps2 <= 0):
            raise ValueError("eps_r^2 must be positive")
        self.load = np.zeros(n, dtype=complex) if load is None else np.asarray(load, dtype=complex)
        self.mass_eps = sp.diags_array(grid.mass_diag * self.eps2).tocsr()
        F = grid.free
        self.K_ff = grid.restrict(grid.stiffness)
        self.M_ff = grid.restrict(self.mass_eps)
        if g_dirichlet is None:
            self.lifting = np.zeros(n, dtype=complex)
            self.has_lifting = False
        else:
            self.lifting = harmonic_lifting(grid, g_dirichlet)
            self.has_lifting = True
        self._f_rhs = (grid.mass @ self.load)[F]
        self._w_rhs = (self.mass_eps @ self.lifting)[F]
        self._solver = ShiftedSolver(self.K_ff, self.M_ff, z0)

    def _embed(self, u_free, base=None):
        out = np.zeros(self.grid.n_nodes, dtype=complex) if base is None else base.copy()
        out[self.grid.free] += u_free
        return out

    def _next_coefficient(self, beta):
        if beta == 0:
            u0 = self._solver.solve(self._f_rhs + self.z0 * self._w_rhs)
            return self._embed(u0, self.lifting)
        rhs = (self.mass_eps @ self.taylor(beta - 1))[self.grid.free]
        return self._embed(self._solver.solve(rhs))

    def evaluate(self, z):
        z = complex(z)
        solver = ShiftedSolver(self.K_ff, self.M_ff, z)
        return self._embed(solver.solve(self._f_rhs + z * self._w_rhs), self.lifting)

    def discrete_poles(self, count, sigma=None):
        """``count`` generalized eigenvalues of ``(K, M_eps)`` nearest ``sigma``."""
        sigma = self.z0.real if sigma is None else sigma
        K = sp.csc_array(self.K_ff.real)
        M = sp.csc_array(self.M_ff.real)
        count = min(count, K.shape[0] - 2)
        # fixed start vector: ARPACK's default is random, which breaks bit-exact re-runs
        v0 = np.ones(K.shape[0])
        vals = spla.eigsh(K, k=count, M=M, sigma=sigma, which="LM", v0=v0, return_eigenvectors=False)
        vals = np.sort(vals)
        return vals[np.argsort(np.abs(vals - self.z0), kind="stable")]


def harmonic_lifting(grid: Grid, g_dirichlet):
    """Discrete harmonic extension of Dirichlet data.

    ``g_dirichlet`` is either a full nodal vector (only Dirichlet entries are
    read) or a callable ``g(x, y)``.
    """
    if callable(g_dirichlet):
        g = grid.interpolate(g_dirichlet)
    else:
        g = np.asarray(g_dirichlet, dtype=complex)
        if g.shape != (grid.n_nodes,):
            raise ValueError("Dirichlet data must be a full nodal vector")
    w = np.zeros(grid.n_nodes, dtype=complex)
    D, F = grid.fixed, grid.free
    w[D] = g[D]
    K = sp.csr_array(grid.stiffness)
    rhs = -(K[F][:, D] @ w[D])
    Kff = K[F][:, F]
    w[F] = ShiftedSolver(Kff, Kff, 0.0, tol=1e-12).solve(rhs)
    return w


# --- transmission problem ---------------------------------------------------

def transmission_coefficients(kappa, theta, n1, n2):
    """Wave vector ``(K1, K2)`` and reflection/transmission ``(R, T)``.

    ``K2`` takes the principal square root, so it has positive imaginary part
    when the radicand is negative (total internal reflection).
    """
    d1, d2 = math.cos(theta), math.sin(theta)
    K1 = kappa * n1 * d1
    K2 = kappa * cmath.sqrt(complex(n2**2 - (n1 * d1) ** 2, 0.0))
    R = -(K2 - kappa * n1 * d2) / (K2 + kappa * n1 * d2)
    return K1, K2, R, 1 + R


def critical_angle(n1, n2):
    """``arccos(n2 / n1)``: below it the upper field is evanescent."""
    return math.acos(n2 / n1)


def exact_transmission(points, kappa, theta, n1, n2):
    """Plane wave refracted/reflected at the interface ``x2 = 0``.

    ``eps_r = n1`` below the interface and ``n2`` above; ``points`` has
    shape ``(..., 2)``.
    """
    p = np.asarray(points, dtype=float)
    x1, x2 = p[..., 0], p[..., 1]
    K1, K2, R, T = transmission_coefficients(kappa, theta, n1, n2)
    d1, d2 = math.cos(theta), math.sin(theta)
    k = kappa * n1
    upper = T * np.exp(1j * (K1 * x1 + K2 * x2))
    lower = np.exp(1j * k * (d1 * x1 + d2 * x2)) + R * np.exp(1j * k * (d1 * x1 - d2 * x2))
    return np.where(x2 > 0, upper, lower)


def transmission_eps2(grid: Grid, n1, n2):
    """Nodal ``eps_r^2``; interface nodes take the average ``(n1^2 + n2^2)/2``."""
    tol = 1e-9 * grid.h
    return np.where(
        grid.y > tol, n2**2, np.where(grid.y < -tol, n1**2, 0.5 * (n1**2 + n2**2))
    )


def transmission_map(n_cells, z0, kappa=11.0, theta=math.radians(29), n1=2.0, n2=1.0):
    """Transmission/reflection problem on ``(-1, 1)^2`` with exact-trace Dirichlet data."""
    if n_cells % 2:
        raise ValueError("n_cells must be even so the interface is a grid line")
    grid = Grid(-1.0, 1.0, -1.0, 1.0, n_cells, n_cells)
    g = exact_transmission(grid.points, kappa, theta, n1, n2)
    return FdHelmholtzMap(grid, z0, eps2=transmission_eps2(grid, n1, n2), g_dirichlet=g)


# --- high-frequency base problem ---------------------------------------------

def plane_wave_bubble(x, y, nu2, angle=math.pi / 6):
    """``w = b(x) exp(-i nu d.x)`` and ``f = -Lap w - nu^2 w`` on ``(0, pi)^2``.

    ``b`` is the quadratic bubble ``x(pi-x) y(pi-y)`` scaled to unit maximum.
    """
    nu = math.sqrt(nu2)
    d1, d2 = math.cos(angle), math.sin(angle)
    scale = (math.pi / 2) ** 4
    bx, by = x * (math.pi - x), y * (math.pi - y)
    b = bx * by / scale
    bx_d, by_d = (math.pi - 2 * x) * by / scale, (math.pi - 2 * y) * bx / scale
    lap_b = (-2 * by - 2 * bx) / scale
    p = np.exp(-1j * nu * (d1 * x + d2 * y))
    w = b * p
    # grad p = -i nu d p; Lap p = -nu^2 p cancels against the -nu^2 w term
    f = -lap_b * p - 2 * (bx_d * (-1j * nu * d1) + by_d * (-1j * nu * d2)) * p
    return w, f


def high_frequency_map(n_cells, z0, nu2=51.0, angle=math.pi / 6):
    grid = Grid(0.0, math.pi, 0.0, math.pi, n_cells, n_cells)
    _, f = plane_wave_bubble(grid.x, grid.y, nu2, angle)
    return FdHelmholtzMap(grid, z0, load=f)


# --- scattering problem ------------------------------------------------------

def impedance_taylor(beta, z0, direction, points, normals):
    """Taylor coefficient of order ``beta`` of ``g_z = i z (d.n - 1) exp(i z d.x)``.

    Returns one value per boundary quadrature entry.
    """
    d = np.asarray(direction, dtype=float)
    a = np.asarray(points, dtype=float) @ d
    dn1 = np.asarray(normals, dtype=float) @ d - 1.0
    z0 = complex(z0)
    e = np.exp(1j * z0 * a)
    term = 1j * z0 * dn1 * (1j * a) ** beta / math.factorial(beta) * e
    if beta >= 1:
        term = term + 1j * dn1 * (1j * a) ** (beta - 1) / math.factorial(beta - 1) * e
    return term


class FdScatteringMap(ResponseMap):
    """Sound-soft obstacle with a first-order absorbing outer boundary.

    Solves ``(K - z^2 M - i z B) u = B g_z`` on free nodes for the incident
    plane wave ``exp(i z d.x)``. The norm weight is ``Re z0``.
    """

    def __init__(self, grid: Grid, z0, theta=0.0, weight=None):
        if grid.impedance is None:
            raise ValueError("scattering grid needs at least one impedance side")
        z0 = complex(z0)
        weight = z0.real if weight is None else weight
        space = WeightedSpace(grid.stiffness, grid.mass, weight, grid.boundary_mass)
        super().__init__(space, z0)
        self.grid = grid
        self.direction = (math.cos(theta), math.sin(theta))
        self.K_ff = grid.restrict(grid.stiffness)
        self.M_ff = grid.restrict(grid.mass)
        self.B_ff = grid.restrict(grid.boundary_mass)
        self._solver = self._shifted(z0)

    def _shifted(self, z):
        return ShiftedSolver(as_sparse(self.K_ff - 1j * z * self.B_ff), self.M_ff, z * z)

    def boundary_load(self, values):
        q = self.grid.impedance
        out = np.zeros(self.grid.n_nodes, dtype=complex)
        np.add.at(out, q.nodes, q.weights * values)
        return out[self.grid.free]

    def _load_taylor(self, beta):
        q = self.grid.impedance
        return self.boundary_load(impedance_taylor(beta, self.z0, self.direction, q.points, q.normals))

    def _embed(self, u_free):
        out = np.zeros(self.grid.n_nodes, dtype=complex)
        out[self.grid.free] = u_free
        return out

    def _next_coefficient(self, beta):
        F = self.grid.free
        rhs = self._load_taylor(beta)
        if beta >= 1:
            s1 = self.taylor(beta - 1)[F]
            rhs = rhs + 2 * self.z0 * (self.M_ff @ s1) + 1j * (self.B_ff @ s1)
        if beta >= 2:
            rhs = rhs + self.M_ff @ self.taylor(beta - 2)[F]
        return self._embed(self._solver.solve(rhs))

    def evaluate(self, z):
        z = complex(z)
        q = self.grid.impedance
        load = self.boundary_load(impedance_taylor(0, z, self.direction, q.points, q.normals))
        return self._embed(self._shifted(z).solve(load))


def scattering_grid(h=0.05, half_width=2.0, obstacle=0.5):
    n = int(round(2 * half_width / h))
    return Grid(
        -half_width, half_width, -half_width, half_width, n, n,
        bc={s: "impedance" for s in ("south", "east", "north", "west")},
        hole=(-obstacle, obstacle, -obstacle, obstacle),
    )


def scattering_map(z0, h=0.05, theta=0.0):
    return FdScatteringMap(scattering_grid(h), z0, theta)
