"""Experiment drivers behind the CLI: norm sweeps, error studies, root tracking
and the Monte Carlo characteristic-function study."""

from __future__ import annotations

import json
import math
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__, _kernels, csvio, maps, svg
from .config import ExperimentConfig
from .errors import PoleProximityError, SolverError
from .grid import square_dirichlet_grid
from .pade import PadeConfig, TaylorTable, build_approximant, default_rho, heuristic_rate
from .stochastic import (
    RandomWavenumber,
    characteristic_fn,
    err_curve,
    fit_rate,
    noise_floor,
    sample_sets,
)


def thread_count():
    raw = os.environ.get("PADE_MOR_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _pmap(func, items):
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(func, items))


@dataclass
class Problem:
    response_map: object
    poles: np.ndarray | None
    weight_label: str
    notes: dict


def _sorted_by_distance(poles, z0):
    p = np.unique(np.asarray(poles, dtype=float))
    return p[np.argsort(np.abs(p - z0), kind="stable")]


def _fd_square_poles(n, z0):
    h = math.pi / n
    mm, nn = np.meshgrid(np.arange(1, n), np.arange(1, n), indexing="ij")
    lam = 4.0 / h**2 * (np.sin(mm * h / 2) ** 2 + np.sin(nn * h / 2) ** 2)
    return _sorted_by_distance(np.round(lam.ravel(), 12), z0)


def build_problem(cfg: ExperimentConfig) -> Problem:
    z0, ph = cfg.z0, cfg.physics
    sqrt_w = f"sqrt(Re z0) = {math.sqrt(z0.real):.17g}"
    if cfg.problem == "model":
        m = maps.high_frequency_map(cfg.grid, z0, ph["nu2"], math.radians(ph["angle_deg"]))
        return Problem(m, _fd_square_poles(cfg.grid, z0), sqrt_w,
                       {"bubble": "x(pi-x)y(pi-y)/(pi/2)^4"})
    if cfg.problem == "transmission":
        m = maps.transmission_map(
            cfg.grid, z0, ph["kappa"], math.radians(ph["theta_deg"]), ph["n1"], ph["n2"]
        )
        return Problem(m, _sorted_by_distance(m.discrete_poles(16), z0), sqrt_w,
                       {"interface_eps2": "(n1^2+n2^2)/2"})
    if cfg.problem == "scattering":
        hw, ob = ph["half_width"], ph["obstacle"]
        h = 2 * hw / cfg.grid
        grid = maps.scattering_grid(h, hw, ob)
        m = maps.FdScatteringMap(grid, z0, math.radians(ph["theta_deg"]))
        return Problem(m, None, f"Re z0 = {z0.real:.17g}", {"parameter": "k (not k^2)"})
    sto = cfg.stochastic
    if sto["truth"] == "modal":
        m = maps.dirichlet_square_oracle(z0, sto["modal_cutoff"])
        return Problem(m, m.sorted_poles(), sqrt_w, {"truth": "modal", "load": "x*y"})
    grid = square_dirichlet_grid(cfg.grid)
    m = maps.FdHelmholtzMap(grid, z0, load=grid.x * grid.y)
    return Problem(m, _fd_square_poles(cfg.grid, z0), sqrt_w, {"truth": "fd", "load": "x*y"})


def resolve_rho(cfg: ExperimentConfig, z=None):
    if cfg.rho == "auto" or (cfg.rho == "distance" and z is None):
        return default_rho(cfg.z0, *cfg.interval)
    if cfg.rho == "distance":
        return abs(complex(z) - cfg.z0)
    return float(cfg.rho)


def _truth(response_map, z, poles):
    """Reference vector at ``z``; shifted by ``1e-10`` if it hits a known pole."""
    if poles is not None and np.any(np.abs(poles - z) < 1e-12):
        z = z + 1e-10
    try:
        return response_map.evaluate(z), "ok"
    except (SolverError, ZeroDivisionError, FloatingPointError):
        return None, "truth_pole"


def sweep_norm(response_map, approximants, zs, poles=None):
    """Rows ``(z, M, N, E, rho, ||S(z)||, ||S_P(z)||, rel_error, flag)``."""
    space = response_map.space
    truths = _pmap(lambda z: _truth(response_map, z, poles), zs)
    rows = []
    for z, (u, flag) in zip(zs, truths):
        nt = space.norm(u) if u is not None else math.nan
        for a in approximants:
            c = a.config
            try:
                v = a.evaluate(z)
                npd = space.norm(v)
                err = space.norm(u - v) / nt if u is not None else math.nan
                f = flag
            except PoleProximityError:
                npd, err, f = math.nan, math.nan, "surrogate_pole"
            rows.append((float(np.real(z)), c.M, c.N, c.E, c.rho, nt, npd, err, f))
    return rows


def _rel_error(space, u, a, z):
    try:
        return space.norm(u - a.evaluate(z)) / space.norm(u)
    except PoleProximityError:
        return math.nan


def error_vs_M(response_map, table, zs, Ms, Ns, cfg: ExperimentConfig, poles=None):
    """Padé error, degree-E Taylor error and heuristic rate per ``(z, M, N)``."""
    space = response_map.space
    rows = []
    for z in zs:
        u, flag = _truth(response_map, z, poles)
        if u is None:
            continue
        rho = resolve_rho(cfg, z)
        for N in Ns:
            for M in Ms:
                E = cfg.resolve_E(M, N)
                a = build_approximant(table, PadeConfig(M, N, cfg.z0, rho, E))
                t = build_approximant(table, PadeConfig(E, 0, cfg.z0, rho, E))
                hr = math.nan
                if poles is not None and len(poles) >= N + 1:
                    hr = heuristic_rate(z, cfg.z0, poles, M, N)
                d = a.diagnostics
                rows.append((
                    float(z), M, N, E, rho, _rel_error(space, u, a, z), _rel_error(space, u, t, z),
                    hr, d.lambda_min, d.gap, d.gram_norm, d.degenerate,
                ))
    return rows


def match_roots(roots, poles):
    """Greedy nearest matching; each pole used at most once, ``-1`` if unmatched."""
    roots = np.asarray(roots, dtype=complex)
    out = [(-1, math.nan, math.nan)] * len(roots)
    if poles is None or len(poles) == 0 or len(roots) == 0:
        return out
    D = np.abs(roots[:, None] - np.asarray(poles, dtype=complex)[None, :])
    pairs = sorted(
        ((D[i, j], i, j) for i in range(D.shape[0]) for j in range(D.shape[1])),
        key=lambda t: (t[0], t[1], t[2]),
    )
    used_r, used_p = set(), set()
    for d, i, j in pairs:
        if i in used_r or j in used_p:
            continue
        used_r.add(i)
        used_p.add(j)
        out[i] = (j, float(np.real(poles[j])), float(d))
        if len(used_r) == len(roots):
            break
    return out


def root_convergence(approximants, poles=None):
    """Rows ``(M, N, root_index, root, pole_index, pole, |r - lambda|, diagnostics)``."""
    rows = []
    for a in approximants:
        d = a.diagnostics
        r = a.poles()
        for k, (root, (j, lam, dist)) in enumerate(zip(r, match_roots(r, poles))):
            rows.append((
                a.M, a.N, k, root.real, root.imag, j, lam, dist,
                d.lambda_min, d.gap, d.gram_norm, d.degenerate,
            ))
    return rows


def _approximants(table, pairs, cfg, rho):
    return [build_approximant(table, PadeConfig(M, N, cfg.z0, rho, cfg.resolve_E(M, N))) for M, N in pairs]


def _meta(cfg, problem, extra=None):
    meta = {
        "config_hash": cfg.digest(),
        "problem": cfg.problem,
        "weight": problem.weight_label,
        "seed": cfg.seed,
        "z0": f"{cfg.z0.real:.17g}{cfg.z0.imag:+.17g}i",
        "rho_rule": str(cfg.rho),
        "E_rule": str(cfg.E),
    }
    for k, v in problem.notes.items():
        meta[k] = v
    if extra:
        meta.update(extra)
    return meta


def run(cfg: ExperimentConfig):
    """Run the configured study, write CSVs and the manifest; return written paths."""
    os.makedirs(cfg.output, exist_ok=True)
    problem = build_problem(cfg)
    m = problem.response_map
    poles = problem.poles
    study = cfg.error_study
    E_max = max(cfg.resolve_E(M, N) for M, N in cfg.degrees)
    if study is not None:
        E_max = max(E_max, max(cfg.resolve_E(M, N) for M in study.M for N in study.N))
    table = TaylorTable.from_map(m, E_max)
    meta = _meta(cfg, problem)
    written = []

    def out(name):
        p = os.path.join(cfg.output, name)
        written.append(p)
        return p

    rho = resolve_rho(cfg)
    approx = _approximants(table, cfg.degrees, cfg, rho)
    kmin, kmax = cfg.interval
    zs = np.linspace(kmin, kmax, cfg.sweep_points) if cfg.sweep_points > 1 else np.array([kmin])
    sweep = sweep_norm(m, approx, zs, poles)
    csvio.write(out("sweep.csv"), "sweep", sweep, meta)
    csvio.write(out("roots.csv"), "roots", root_convergence(approx, poles), meta)

    if study is not None:
        ev = error_vs_M(m, table, study.points, study.M, study.N, cfg, poles)
        csvio.write(out("error_vs_M.csv"), "error_vs_M", ev, meta)
        study_apx = [
            build_approximant(table, PadeConfig(M, N, cfg.z0, rho, cfg.resolve_E(M, N)))
            for N in study.N for M in study.M
        ]
        csvio.write(out("roots_vs_M.csv"), "roots", root_convergence(study_apx, poles), meta)
        if cfg.svg:
            series = {}
            for r in ev:
                series.setdefault(f"z={r[0]:g} N={r[2]}", ([], []))
                series[f"z={r[0]:g} N={r[2]}"][0].append(r[1])
                series[f"z={r[0]:g} N={r[2]}"][1].append(r[5])
            svg.line_plot(out("error_vs_M.svg"), series, "relative error", "M", "error")

    if cfg.problem == "stochastic":
        written += _run_stochastic(cfg, problem, approx, rho, meta)

    if cfg.svg:
        series = {"truth": (list(zs), [r[5] for r in sweep][:: len(approx)])}
        for a in approx:
            key = f"M={a.M} N={a.N}"
            series[key] = (
                [r[0] for r in sweep if (r[1], r[2]) == (a.M, a.N)],
                [r[6] for r in sweep if (r[1], r[2]) == (a.M, a.N)],
            )
        svg.line_plot(out("sweep.svg"), series, "weighted norm", "z", "norm")

    manifest = {
        "config": cfg.to_dict(),
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "versions": {
            "pade_mor": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "kernel_backend": _kernels.BACKEND,
        "taylor_orders": E_max,
        "files": sorted(os.path.basename(p) for p in written),
    }
    with open(out("manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return written


def _run_stochastic(cfg, problem, approx, rho, meta):
    sto = cfg.stochastic
    rw = RandomWavenumber(cfg.interval[0], cfg.interval[1], cfg.seed)
    n = sto["samples"]
    sets = sample_sets(rw, n, problem.response_map, approx, truth_poles=problem.poles)
    tg = np.linspace(-sto["t_max"], sto["t_max"], sto["t_points"])
    floor = noise_floor(n)
    paths = []

    # samples: one row per draw and surrogate, truth repeated for convenience
    srows = []
    for a, ss in zip(approx, sets):
        for k2, x, xp in zip(ss.draws, ss.X, ss.XP):
            srows.append((k2, x, a.M, a.N, xp))
    p = os.path.join(cfg.output, "samples.csv")
    csvio.write(p, "samples", srows, meta)
    paths.append(p)

    crows, maxerr = [], {}
    for a, ss in zip(approx, sets):
        px = characteristic_fn(ss.X, tg)
        pp = characteristic_fn(ss.XP, tg)
        e = err_curve(ss, tg)
        maxerr[(a.M, a.N)] = float(e.max())
        for t, u, v, w in zip(tg, px, pp, e):
            crows.append((a.M, a.N, t, u.real, u.imag, v.real, v.imag, w))
    p = os.path.join(cfg.output, "chf.csv")
    csvio.write(p, "chf", crows, meta)
    paths.append(p)

    rrows = []
    poles = problem.poles
    for N in sorted({a.N for a in approx}):
        group = [(a, ss) for a, ss in zip(approx, sets) if a.N == N]
        Ms = [a.M for a, _ in group]
        errs = [maxerr[(a.M, N)] for a, _ in group]
        R = abs(poles[N] - cfg.z0) if poles is not None and len(poles) > N else math.nan
        fit = fit_rate(Ms, errs, rho, R, floor) if math.isfinite(R) and len(Ms) >= 2 else None
        for (a, ss), e in zip(group, errs):
            rrows.append((
                a.M, N, e,
                math.nan if fit is None else fit.slope,
                math.nan if fit is None else fit.stderr,
                math.nan if fit is None else fit.theoretical,
                floor,
                True if fit is None else fit.unresolved,
                False if fit is None or fit.unresolved else fit.consistent,
                ss.excluded_truth, ss.excluded_surrogate,
            ))
    p = os.path.join(cfg.output, "rates.csv")
    csvio.write(p, "rates", rrows, meta)
    paths.append(p)
    return paths
