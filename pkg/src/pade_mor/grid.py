"""Uniform finite-difference grids on rectangles, optionally minus a square hole.

Matrices are assembled cell by cell so that one rule covers interior,
boundary and corner nodes: every cell inside the domain contributes
``h^2/4`` of mass to each of its four nodes and half of ``|u_a - u_b|^2``
for each of its four edges. On interior nodes this is exactly ``h^2`` times
the 5-point negative Laplacian with ``h^2`` lumped mass; on Neumann sides it
reproduces ghost-node elimination.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

SIDES = ("south", "east", "north", "west")
_NORMALS = {
    "south": (0.0, -1.0),
    "east": (1.0, 0.0),
    "north": (0.0, 1.0),
    "west": (-1.0, 0.0),
}
_KINDS = ("dirichlet", "neumann", "impedance")


@dataclass(frozen=True)
class BoundaryQuadrature:
    """Trapezoid rule on impedance sides: one entry per (node, side) pair."""

    nodes: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    points: np.ndarray


@dataclass
class Grid:
    """Node-centred grid on ``[x0, x1] x [y0, y1]`` with ``nx x ny`` cells.

    ``bc`` maps each side name to ``"dirichlet"``, ``"neumann"`` or
    ``"impedance"``. ``hole`` is an optional grid-aligned rectangle
    ``(x0, x1, y0, y1)`` removed from the domain; its boundary is Dirichlet.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    bc: dict = field(default_factory=lambda: {s: "dirichlet" for s in SIDES})
    hole: tuple | None = None

    def __post_init__(self):
        for s in SIDES:
            kind = self.bc.get(s, "dirichlet")
            if kind not in _KINDS:
                raise ValueError(f"unknown boundary kind {kind!r} on side {s}")
        self.bc = {s: self.bc.get(s, "dirichlet") for s in SIDES}
        hx = (self.x1 - self.x0) / self.nx
        hy = (self.y1 - self.y0) / self.ny
        if not np.isclose(hx, hy, rtol=1e-12):
            raise ValueError(f"grid spacing must be uniform, got hx={hx}, hy={hy}")
        self.h = hx
        self._build()

    # -- topology ------------------------------------------------------------

    def _hole_index_box(self):
        if self.hole is None:
            return None
        hx0, hx1, hy0, hy1 = self.hole
        box = [
            (hx0 - self.x0) / self.h,
            (hx1 - self.x0) / self.h,
            (hy0 - self.y0) / self.h,
            (hy1 - self.y0) / self.h,
        ]
        ibox = [int(round(b)) for b in box]
        if not np.allclose(box, ibox, atol=1e-9):
            raise ValueError("hole must be aligned with grid lines")
        i0, i1, j0, j1 = ibox
        if not (0 < i0 < i1 < self.nx and 0 < j0 < j1 < self.ny):
            raise ValueError("hole must lie strictly inside the rectangle")
        return i0, i1, j0, j1

    def _build(self):
        nx, ny = self.nx, self.ny
        box = self._hole_index_box()
        cell_in = np.ones((ny, nx), dtype=bool)
        if box is not None:
            i0, i1, j0, j1 = box
            cell_in[j0:j1, i0:i1] = False
        # a node belongs to the domain if any adjacent cell does
        node_in = np.zeros((ny + 1, nx + 1), dtype=bool)
        for dj in (0, 1):
            for di in (0, 1):
                node_in[dj:dj + ny, di:di + nx] |= cell_in
        index = -np.ones((ny + 1, nx + 1), dtype=np.int64)
        index[node_in] = np.arange(node_in.sum())
        self.index = index
        jj, ii = np.nonzero(node_in)
        self.ij = np.stack([ii, jj], axis=1)
        self.x = self.x0 + ii * self.h
        self.y = self.y0 + jj * self.h
        self.n_nodes = len(ii)

        cj, ci = np.nonzero(cell_in)
        corners = [index[cj + dj, ci + di] for dj, di in ((0, 0), (0, 1), (1, 1), (1, 0))]
        mass = np.zeros(self.n_nodes)
        for c in corners:
            np.add.at(mass, c, self.h**2 / 4)
        rows, cols, vals = [], [], []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            for r, c, v in ((a, a, 0.5), (b, b, 0.5), (a, b, -0.5), (b, a, -0.5)):
                rows.append(r)
                cols.append(c)
                vals.append(np.full(r.shape, v))
        K = sp.coo_array(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_nodes, self.n_nodes),
        ).tocsr()
        K.sum_duplicates()
        self.stiffness = K
        self.mass_diag = mass
        self.mass = sp.diags_array(mass).tocsr()

        dirichlet = np.zeros(self.n_nodes, dtype=bool)
        side_nodes = {
            "south": index[0, :],
            "north": index[ny, :],
            "west": index[:, 0],
            "east": index[:, nx],
        }
        for s in SIDES:
            if self.bc[s] == "dirichlet":
                dirichlet[side_nodes[s]] = True
        if box is not None:
            i0, i1, j0, j1 = box
            ring = np.zeros_like(node_in)
            ring[j0:j1 + 1, i0:i1 + 1] = True
            ring[j0 + 1:j1, i0 + 1:i1] = False
            dirichlet[index[ring]] = True
        self.dirichlet = dirichlet
        self.free = np.nonzero(~dirichlet)[0]
        self.fixed = np.nonzero(dirichlet)[0]

        qn, qw, qnorm = [], [], []
        for s in SIDES:
            if self.bc[s] != "impedance":
                continue
            nodes = side_nodes[s]
            w = np.full(len(nodes), self.h)
            w[0] = w[-1] = self.h / 2
            qn.append(nodes)
            qw.append(w)
            qnorm.append(np.tile(_NORMALS[s], (len(nodes), 1)))
        if qn:
            nodes = np.concatenate(qn)
            self.impedance = BoundaryQuadrature(
                nodes=nodes,
                weights=np.concatenate(qw),
                normals=np.concatenate(qnorm),
                points=np.stack([self.x[nodes], self.y[nodes]], axis=1),
            )
            bm = np.zeros(self.n_nodes)
            np.add.at(bm, nodes, self.impedance.weights)
            self.boundary_mass = sp.diags_array(bm).tocsr()
        else:
            self.impedance = None
            self.boundary_mass = None

    # -- helpers -------------------------------------------------------------

    @property
    def points(self):
        return np.stack([self.x, self.y], axis=1)

    def restrict(self, A, rows=None, cols=None):
        rows = self.free if rows is None else rows
        cols = self.free if cols is None else cols
        return sp.csr_array(A)[rows][:, cols]

    def interpolate(self, func):
        """Nodal values of ``func(x, y)`` (vectorised)."""
        return np.asarray(func(self.x, self.y), dtype=complex) * np.ones(self.n_nodes)

    def boundary_nodes(self):
        """Indices of the nodes on the outer rectangle."""
        ii, jj = self.ij[:, 0], self.ij[:, 1]
        return np.nonzero((ii == 0) | (ii == self.nx) | (jj == 0) | (jj == self.ny))[0]

    def to_csv_rows(self, values):
        """``(node, x, y, re, im)`` rows for debugging exports."""
        values = np.asarray(values, dtype=complex)
        return [
            (k, self.x[k], self.y[k], values[k].real, values[k].imag)
            for k in range(self.n_nodes)
        ]


def square_dirichlet_grid(n, length=np.pi):
    """``(0, length)^2`` with ``n`` cells per side, homogeneous Dirichlet."""
    return Grid(0.0, length, 0.0, length, n, n)
