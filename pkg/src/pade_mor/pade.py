"""Least-squares Padé approximants of vector-valued response maps.

Given Taylor coefficients ``S_0 .. S_E`` at ``z0`` the denominator ``q`` is
the unit vector minimising

    jbar(q)^2 = sum_{a=M+1}^{E} rho^(2a) || sum_n q_n S_{a-n} ||_w^2 = q^H G q

and the numerator matches ``Q S`` up to order ``M``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleProximityError
from .linalg import (
    ShiftedPolynomial,
    hermitian_smallest_eigpair,
    poly_roots,
    smallest_eigpair_from_factor,
)
from .space import WeightedSpace

POLE_TOL = 1e-13
DEGENERATE_GAP = 1e-12


def default_rho(z0, kmin, kmax):
    """Smallest radius of a disk about ``z0`` containing ``[kmin, kmax]``."""
    z0 = complex(z0)
    return max(abs(kmin - z0), abs(kmax - z0))


@dataclass(frozen=True)
class PadeConfig:
    M: int
    N: int
    z0: complex
    rho: float
    E: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "z0", complex(self.z0))
        if self.E is None:
            object.__setattr__(self, "E", self.M + self.N)
        if self.M < 0 or self.N < 0:
            raise ValueError(f"degrees must be non-negative, got M={self.M}, N={self.N}")
        if self.E < self.M + self.N:
            raise ValueError(f"E={self.E} must be at least M+N={self.M + self.N}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not self.z0.real > 0:
            raise ValueError(f"Re(z0) must be positive, got {self.z0}")


@dataclass
class TaylorTable:
    """Taylor coefficients ``S_0 .. S_E`` (rows) of a map about ``z0``."""

    coefficients: np.ndarray
    space: WeightedSpace
    z0: complex
    _coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.coefficients = np.atleast_2d(np.asarray(self.coefficients, dtype=complex))
        self.space.check(self.coefficients)
        self.z0 = complex(self.z0)

    @classmethod
    def from_map(cls, response_map, E):
        return cls(response_map.taylor_coefficients(E), response_map.space, response_map.z0)

    @property
    def E(self):
        return self.coefficients.shape[0] - 1

    def __getitem__(self, beta):
        if beta < 0:
            return np.zeros(self.space.dim, dtype=complex)
        return self.coefficients[beta]

    def coordinates(self):
        """Column ``b`` holds ``S_b`` in a W-orthonormal basis of the table's span."""
        if self._coords is None:
            _, self._coords = self.space.orthonormal_basis(self.coefficients)
        return self._coords

    def scaled(self, c):
        return TaylorTable(c * self.coefficients, self.space, self.z0)


def _check(T: TaylorTable, cfg: PadeConfig):
    if cfg.E > T.E:
        raise ValueError(f"table holds orders up to {T.E}, config needs E={cfg.E}")
    if T.z0 != cfg.z0:
        raise ValueError(f"table center {T.z0} differs from config center {cfg.z0}")


def gramian_factor(T: TaylorTable, cfg: PadeConfig):
    """Tall matrix ``B`` with ``B^H B = G``.

    Block row ``a`` (``a = M+1..E``) holds ``rho^a`` times the coordinates of
    ``S_{a-j}`` in column ``j``.
    """
    _check(T, cfg)
    M, N, E = cfg.M, cfg.N, cfg.E
    if E < M + 1:
        raise ValueError(f"empty Gramian sum: E={E} < M+1={M + 1}")
    R = T.coordinates()
    r = R.shape[0]
    B = np.zeros(((E - M) * r, N + 1), dtype=complex)
    for k, a in enumerate(range(M + 1, E + 1)):
        w = cfg.rho**a
        for j in range(min(N, a) + 1):
            B[k * r:(k + 1) * r, j] = w * R[:, a - j]
    return B


def build_gramian(T: TaylorTable, cfg: PadeConfig):
    """``G[i, j] = sum_{a=M+1}^{E} rho^(2a) S_{a-i}^H W S_{a-j}`` (zero for negative orders)."""
    B = gramian_factor(T, cfg)
    G = B.conj().T @ B
    return 0.5 * (G + G.conj().T)


@dataclass(frozen=True)
class Diagnostics:
    lambda_min: float
    gap: float
    gram_norm: float
    degenerate: bool

    def as_dict(self):
        return {
            "lambda_min": self.lambda_min,
            "gap": self.gap,
            "gram_norm": self.gram_norm,
            "degenerate": self.degenerate,
        }


def compute_denominator(G, z0):
    """Smallest eigenvector of the Gramian as a polynomial in ``z - z0``."""
    pair = hermitian_smallest_eigpair(G)
    gnorm = float(np.linalg.norm(G, 2)) if np.size(G) else 0.0
    degenerate = bool(pair.gap <= DEGENERATE_GAP * gnorm)
    return ShiftedPolynomial(z0, pair.vector), Diagnostics(pair.value, pair.gap, gnorm, degenerate)


def compute_denominator_from_factor(B, z0):
    """Same result as :func:`compute_denominator` on ``B^H B`` without forming it.

    Working on the factor keeps the relative accuracy of small eigenvalues,
    which matters when the Taylor coefficients span many orders of magnitude.
    """
    pair = smallest_eigpair_from_factor(B)
    gnorm = float(np.linalg.norm(B, 2) ** 2) if np.size(B) else 0.0
    degenerate = bool(pair.gap <= DEGENERATE_GAP * gnorm)
    return ShiftedPolynomial(z0, pair.vector), Diagnostics(pair.value, pair.gap, gnorm, degenerate)


def compute_numerator(T: TaylorTable, q: ShiftedPolynomial, cfg: PadeConfig):
    """``p_a = sum_{n <= min(a, N)} q_n S_{a-n}`` for ``a = 0..M``; rows of the result."""
    qc = q.coeffs
    P = np.zeros((cfg.M + 1, T.space.dim), dtype=complex)
    for a in range(cfg.M + 1):
        for n in range(min(a, len(qc) - 1) + 1):
            P[a] += qc[n] * T[a - n]
    return P


def jbar(T: TaylorTable, q: ShiftedPolynomial, cfg: PadeConfig):
    """Residual functional evaluated directly from the Taylor coefficients."""
    _check(T, cfg)
    qc = q.coeffs
    total = 0.0
    for a in range(cfg.M + 1, cfg.E + 1):
        v = np.zeros(T.space.dim, dtype=complex)
        for n in range(len(qc)):
            if a - n >= 0:
                v += qc[n] * T[a - n]
        total += cfg.rho ** (2 * a) * T.space.norm(v) ** 2
    return math.sqrt(total)


def heuristic_rate(z, z0, poles, M, N):
    """``(|z0 - z| / |z0 - lambda_{N+1}|)^(M+1)`` with poles ordered by distance to ``z0``."""
    poles = np.asarray(poles, dtype=complex)
    if poles.size < N + 1:
        raise ValueError(f"need at least N+1={N + 1} poles, got {poles.size}")
    d = np.sort(np.abs(poles - complex(z0)), kind="stable")
    return (abs(complex(z0) - complex(z)) / d[N]) ** (M + 1)


class PadeApproximant:
    """``P(z) / Q(z)`` with vector numerator rows ``p_0 .. p_M``."""

    def __init__(self, numerator, denominator: ShiftedPolynomial, diagnostics: Diagnostics,
                 config: PadeConfig | None = None, space: WeightedSpace | None = None):
        self.numerator = np.atleast_2d(np.asarray(numerator, dtype=complex))
        self.denominator = denominator
        self.diagnostics = diagnostics
        self.config = config
        self.space = space
        self._reduced = None

    @property
    def z0(self):
        return self.denominator.center

    @property
    def M(self):
        return self.numerator.shape[0] - 1

    @property
    def N(self):
        return self.denominator.degree

    def _q_guard(self, z):
        Q = self.denominator(z)
        scale = np.max(np.abs(self.denominator.coeffs))
        if abs(Q) <= POLE_TOL * scale:
            raise PoleProximityError(f"|Q({z})| = {abs(Q):.3e} is at a surrogate pole", abs(Q))
        return Q

    def numerator_at(self, z):
        w = complex(z) - self.z0
        out = np.zeros(self.numerator.shape[1], dtype=complex)
        for p in self.numerator[::-1]:
            out = out * w + p
        return out

    def evaluate(self, z):
        Q = self._q_guard(complex(z))
        return self.numerator_at(z) / Q

    __call__ = evaluate

    def norms(self, zs):
        """Weighted norms of ``S_P(z)``; ``nan`` where ``|Q|`` is at the pole threshold."""
        if self.space is None:
            raise ValueError("approximant has no space attached")
        if self._reduced is None:
            _, R = self.space.orthonormal_basis(self.numerator)
            self._reduced = R
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        w = zs - self.z0
        V = w[:, None] ** np.arange(self.M + 1)[None, :]
        num = np.linalg.norm(V @ self._reduced.T, axis=1)
        Q = np.abs(self.denominator(zs))
        scale = np.max(np.abs(self.denominator.coeffs))
        out = num / Q
        out[Q <= POLE_TOL * scale] = np.nan
        return out

    def poles(self):
        """All denominator roots, nearest ``z0`` first."""
        if self.N == 0:
            return np.zeros(0, dtype=complex)
        return poly_roots(self.denominator)

    def filtered_poles(self, interval):
        """Roots with ``|Im| <= 1`` inside twice the interval, about its midpoint."""
        lo, hi = interval
        mid, half = 0.5 * (lo + hi), hi - lo
        r = self.poles()
        keep = (np.abs(r.imag) <= 1.0) & (np.abs(r.real - mid) <= half)
        return r[keep]

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        cfg = self.config
        return {
            "z0": [self.z0.real, self.z0.imag],
            "denominator": [[c.real, c.imag] for c in self.denominator.coeffs],
            "numerator": {
                "re": self.numerator.real.tolist(),
                "im": self.numerator.imag.tolist(),
            },
            "diagnostics": self.diagnostics.as_dict(),
            "config": None if cfg is None else {"M": cfg.M, "N": cfg.N, "E": cfg.E, "rho": cfg.rho},
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc, space=None):
        z0 = complex(*doc["z0"])
        q = ShiftedPolynomial(z0, [complex(a, b) for a, b in doc["denominator"]])
        num = np.array(doc["numerator"]["re"], dtype=float) + 1j * np.array(
            doc["numerator"]["im"], dtype=float
        )
        diag = Diagnostics(**doc["diagnostics"])
        c = doc.get("config")
        cfg = None if c is None else PadeConfig(c["M"], c["N"], z0, c["rho"], c["E"])
        return cls(num, q, diag, cfg, space)

    @classmethod
    def from_json(cls, text, space=None):
        return cls.from_dict(json.loads(text), space)


def build_approximant(T: TaylorTable, cfg: PadeConfig) -> PadeApproximant:
    """Run the full construction: Gramian, denominator, numerator.

    With ``N = 0`` the unit-norm scalar denominator is fixed to ``1`` and no
    Gramian is needed, which also covers ``E = M``.
    """
    _check(T, cfg)
    if cfg.N == 0:
        q = ShiftedPolynomial(cfg.z0, [1.0])
        lam = jbar(T, q, cfg) ** 2
        diag = Diagnostics(lam, math.inf, lam, False)
    else:
        q, diag = compute_denominator_from_factor(gramian_factor(T, cfg), cfg.z0)
    P = compute_numerator(T, q, cfg)
    return PadeApproximant(P, q, diag, cfg, T.space)


def pade(response_map, M, N, rho, E=None):
    """Convenience wrapper: Taylor table from a map, then the approximant."""
    cfg = PadeConfig(M, N, response_map.z0, rho, E)
    return build_approximant(TaylorTable.from_map(response_map, cfg.E), cfg)
