import math

import numpy as np
import pytest
import scipy.linalg as sla

from oracles import dense_dirichlet_laplacian
from pade_mor.grid import Grid, square_dirichlet_grid
from pade_mor.maps import fd_eigenvalue, scattering_grid


def test_interior_stencil_and_mass():
    g = square_dirichlet_grid(8)
    k = g.index[4, 4]
    row = g.stiffness[[k]].toarray().ravel().real
    assert row[k] == 4.0
    nbrs = [g.index[4, 5], g.index[4, 3], g.index[5, 4], g.index[3, 4]]
    assert np.all(row[nbrs] == -1.0)
    assert np.count_nonzero(row) == 5
    assert g.mass_diag[k] == pytest.approx(g.h**2)


def test_restricted_stiffness_matches_dense_laplacian():
    g = square_dirichlet_grid(10)
    L, h = dense_dirichlet_laplacian(10)
    K = g.restrict(g.stiffness).toarray().real
    # both orderings are row-major in (y, x) over interior nodes
    assert np.allclose(K / h**2, L)


def test_fd_eigenvalues_against_dense_solve(frozen):
    g = square_dirichlet_grid(16)
    K = g.restrict(g.stiffness).toarray().real
    M = g.restrict(g.mass).toarray().real
    w = sla.eigh(K, M, eigvals_only=True)[:6]
    assert np.allclose(w, frozen["fd_eig_h_pi16_first6"], rtol=1e-10)
    for (m, n), val in zip([(1, 1), (1, 2), (2, 1), (2, 2)], [w[0], w[1], w[2], w[3]]):
        assert fd_eigenvalue(m, n, g.h) == pytest.approx(val, rel=1e-10)


def test_fd_eigenvalue_limits(frozen):
    assert fd_eigenvalue(2, 2, math.pi / 64) == pytest.approx(frozen["fd_eig_22_h_pi64"], rel=1e-14)
    assert fd_eigenvalue(2, 2, 1e-4) == pytest.approx(8.0, rel=1e-7)
    assert fd_eigenvalue(1, 3, 1e-4) == pytest.approx(10.0, rel=1e-7)


def test_all_neumann_annihilates_constants():
    g = Grid(0, 1, 0, 2, 5, 10, bc={s: "neumann" for s in ("south", "east", "north", "west")})
    assert np.allclose(g.stiffness @ np.ones(g.n_nodes), 0)
    assert g.mass_diag.sum() == pytest.approx(2.0)
    assert len(g.fixed) == 0


def test_neumann_side_is_second_order_ghost_elimination():
    g = Grid(0, 1, 0, 1, 4, 4, bc={"south": "neumann"})
    k = g.index[0, 2]
    row = g.stiffness[[k]].toarray().ravel().real
    # ghost node elimination: (4u - 2u_N - u_E - u_W)/h^2 times h^2/2 mass
    assert row[k] == 2.0 and row[g.index[1, 2]] == -1.0 and row[g.index[0, 1]] == -0.5
    assert g.mass_diag[k] == pytest.approx(g.h**2 / 2)


def test_impedance_quadrature_weights():
    g = Grid(-1, 1, -1, 1, 8, 8, bc={s: "impedance" for s in ("south", "east", "north", "west")})
    q = g.impedance
    assert q.weights.sum() == pytest.approx(8.0)
    assert g.boundary_mass.diagonal().sum() == pytest.approx(8.0)
    corner = g.index[0, 0]
    assert g.boundary_mass.diagonal()[corner] == pytest.approx(g.h)
    assert np.allclose(np.linalg.norm(q.normals, axis=1), 1)


def test_obstacle_grid_counts():
    g = scattering_grid(0.05)
    assert g.n_nodes == 81**2 - 19**2
    assert len(g.fixed) == 80 and len(g.free) == 6120
    inside = (np.abs(g.x) < 0.5 - 1e-9) & (np.abs(g.y) < 0.5 - 1e-9)
    assert not inside.any()


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0, 1, 0, 2, 4, 4)
    with pytest.raises(ValueError):
        Grid(0, 1, 0, 1, 4, 4, bc={"north": "robin"})
    with pytest.raises(ValueError):
        Grid(0, 1, 0, 1, 4, 4, hole=(0.1, 0.6, 0.25, 0.75))


def test_csv_rows_and_interpolate():
    g = square_dirichlet_grid(4)
    v = g.interpolate(lambda x, y: x + 1j * y)
    rows = g.to_csv_rows(v)
    assert len(rows) == g.n_nodes
    k, x, y, re, im = rows[7]
    assert (re, im) == (x, y)
