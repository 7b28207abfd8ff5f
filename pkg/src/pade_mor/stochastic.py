"""Random wavenumbers, quantities of interest and characteristic functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .pade import POLE_TOL

NEAR_POLE = 1e-8


@dataclass(frozen=True)
class RandomWavenumber:
    """Squared wavenumber ``k^2`` on ``[kmin, kmax]``.

    ``density`` is ``"uniform"`` or a callable ``(generator, count) -> draws``
    for other laws supported in the interval.
    """

    kmin: float
    kmax: float
    seed: int = 0
    density: object = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.kmin) and math.isfinite(self.kmax)):
            raise ValueError("interval bounds must be finite")
        if not self.kmin < self.kmax:
            raise ValueError(f"need kmin < kmax, got [{self.kmin}, {self.kmax}]")
        if self.density != "uniform" and not callable(self.density):
            raise ValueError(f"unknown density {self.density!r}")

    def generator(self):
        return np.random.Generator(np.random.Philox(self.seed))

    @property
    def midpoint(self):
        return 0.5 * (self.kmin + self.kmax)


def draw_samples(rw: RandomWavenumber, count):
    if count < 1:
        raise ValueError("count must be at least 1")
    gen = rw.generator()
    if rw.density == "uniform":
        return gen.uniform(rw.kmin, rw.kmax, size=count)
    x = np.asarray(rw.density(gen, count), dtype=float)
    if x.shape != (count,) or np.any((x < rw.kmin) | (x > rw.kmax)):
        raise ValueError("density hook returned draws outside the interval")
    return x


@dataclass(frozen=True)
class QuantityOfInterest:
    """Lipschitz functional of a nodal vector; ``None`` means the weighted norm."""

    func: object = None
    lipschitz: float = 1.0

    @property
    def is_norm(self):
        return self.func is None


WEIGHTED_NORM = QuantityOfInterest()


def _surrogate_ok(approx, draws):
    Q = np.abs(approx.denominator(draws))
    return Q > POLE_TOL * np.max(np.abs(approx.denominator.coeffs))


def _truth_ok(poles, draws):
    if poles is None or len(poles) == 0:
        return np.ones(draws.shape, dtype=bool)
    p = np.sort(np.asarray(poles, dtype=float))
    k = np.clip(np.searchsorted(p, draws), 1, len(p)) if len(p) > 1 else np.zeros(draws.shape, int)
    near = np.minimum(np.abs(draws - p[np.maximum(k - 1, 0)]), np.abs(draws - p[np.minimum(k, len(p) - 1)]))
    return near > NEAR_POLE


def evaluate_qoi(draws, target, qoi=WEIGHTED_NORM):
    """QoI of ``target`` (map or approximant) at each draw, in draw order."""
    draws = np.asarray(draws, dtype=float)
    if qoi.is_norm and hasattr(target, "norms"):
        return np.asarray(target.norms(draws), dtype=float)
    vals = [target.evaluate(z) for z in draws]
    if qoi.is_norm:
        return target.space.norms(np.array(vals))
    return np.array([float(qoi.func(v)) for v in vals])


@dataclass
class SampleSet:
    draws: np.ndarray
    X: np.ndarray
    XP: np.ndarray
    seed: int
    excluded_truth: int = 0
    excluded_surrogate: int = 0

    def __post_init__(self):
        if not (len(self.draws) == len(self.X) == len(self.XP)):
            raise ValueError("draws, X and XP must have equal length")

    @property
    def count(self):
        return len(self.draws)


def sample_sets(rw: RandomWavenumber, count, truth, approximants, qoi=WEIGHTED_NORM, truth_poles=None):
    """Common-random-number samples of ``X`` and ``X_P`` for several surrogates.

    The truth is evaluated once. Draws within ``1e-8`` of a pole of the truth
    are dropped everywhere; draws where a surrogate denominator is at its
    pole threshold are dropped from that surrogate's pair only.
    """
    draws = draw_samples(rw, count)
    ok_t = _truth_ok(truth_poles, draws)
    X = evaluate_qoi(draws[ok_t], truth, qoi)
    out = []
    for approx in approximants:
        ok_s = _surrogate_ok(approx, draws[ok_t])
        d = draws[ok_t][ok_s]
        out.append(SampleSet(
            d, X[ok_s], evaluate_qoi(d, approx, qoi), rw.seed,
            int(np.count_nonzero(~ok_t)), int(np.count_nonzero(~ok_s)),
        ))
    return out


def sample_set(rw: RandomWavenumber, count, truth, approx, qoi=WEIGHTED_NORM, truth_poles=None):
    """Single-surrogate form of :func:`sample_sets`."""
    return sample_sets(rw, count, truth, [approx], qoi, truth_poles)[0]


def _pairwise_sum(x):
    """Order-insensitive to about one ulp per level; reductions along the last axis."""
    x = np.asarray(x)
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            x = np.concatenate([x, np.zeros(x.shape[:-1] + (1,), dtype=x.dtype)], axis=-1)
        x = x[..., 0::2] + x[..., 1::2]
    return x[..., 0]


def characteristic_fn(values, t):
    """Empirical ``E[exp(i t X)]``; accepts scalar or array ``t``.

    Real and imaginary parts are averaged separately so that ``t = 0`` gives
    exactly ``1`` and ``-t`` gives the exact conjugate.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("need at least one value")
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    n = x.size
    # sort so the pairwise reduction does not depend on sample order
    xs = np.sort(x)
    out = np.empty(tt.shape, dtype=complex)
    for k, tk in enumerate(tt):
        ph = tk * xs
        re = _pairwise_sum(np.cos(ph)) / n
        im = _pairwise_sum(np.sin(ph)) / n
        out[k] = complex(min(re, 1.0) if tk == 0 else re, im)
    out = np.where(np.abs(out) > 1.0, out / np.abs(out), out)
    return out[0] if np.ndim(t) == 0 else out


def err_curve(ss: SampleSet, t_grid):
    phi_x = characteristic_fn(ss.X, np.asarray(t_grid, dtype=float))
    phi_p = characteristic_fn(ss.XP, np.asarray(t_grid, dtype=float))
    return np.abs(phi_x - phi_p)


def noise_floor(count):
    return 8.0 / math.sqrt(count)


@dataclass(frozen=True)
class RateFit:
    slope: float
    stderr: float
    intercept: float
    theoretical: float
    unresolved: bool

    @property
    def consistent(self):
        """Observed decay no slower than the bound allows, within two standard errors."""
        return self.slope <= self.theoretical + 2 * self.stderr


def fit_rate(Ms, errs, rho, R, floor=0.0):
    """Least-squares slope of ``log err`` against ``M``, next to ``log(rho/R)/4``.

    Errors at or below ``floor`` are left out; with fewer than two usable
    points the fit is flagged as unresolved.
    """
    Ms = np.asarray(Ms, dtype=float)
    errs = np.asarray(errs, dtype=float)
    theory = 0.25 * math.log(rho / R)
    use = errs > floor
    if np.count_nonzero(use) < 2:
        return RateFit(math.nan, math.nan, math.nan, theory, True)
    x, y = Ms[use], np.log(errs[use])
    if np.count_nonzero(use) == 2:
        slope = (y[1] - y[0]) / (x[1] - x[0])
        return RateFit(slope, 0.0, y[0] - slope * x[0], theory, False)
    fit = stats.linregress(x, y)
    return RateFit(float(fit.slope), float(fit.stderr), float(fit.intercept), theory, False)
