"""Experiment configuration: JSON in, validated dataclass out."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

from .errors import ConfigError

PROBLEMS = ("model", "transmission", "scattering", "stochastic")

DEFAULT_GRID = {"model": 64, "transmission": 64, "scattering": 80, "stochastic": 64}

DEFAULT_PHYSICS = {
    "model": {"nu2": 51.0, "angle_deg": 30.0},
    "transmission": {"kappa": 11.0, "theta_deg": 29.0, "n1": 2.0, "n2": 1.0},
    "scattering": {"theta_deg": 0.0, "half_width": 2.0, "obstacle": 0.5},
    "stochastic": {},
}

DEFAULT_STOCHASTIC = {
    "samples": 100000,
    "t_max": 5.0,
    "t_points": 41,
    "truth": "modal",
    "modal_cutoff": 40,
}

_TOP_KEYS = {
    "problem", "grid", "interval", "z0", "degrees", "error_study", "E", "rho",
    "sweep_points", "seed", "output", "physics", "stochastic", "svg",
}


@dataclass
class ErrorStudy:
    points: list
    N: list
    M: list


@dataclass
class ExperimentConfig:
    problem: str
    interval: tuple
    z0: complex
    degrees: list
    grid: int
    E: object = "M+N"
    rho: object = "auto"
    sweep_points: int = 101
    seed: int = 0
    output: str = "out"
    physics: dict = field(default_factory=dict)
    stochastic: dict = field(default_factory=dict)
    error_study: ErrorStudy | None = None
    svg: bool = False

    def resolve_E(self, M, N):
        return M + N if self.E == "M+N" else int(self.E)

    def to_dict(self):
        d = asdict(self)
        d["z0"] = [self.z0.real, self.z0.imag]
        d["interval"] = list(self.interval)
        d["degrees"] = [list(p) for p in self.degrees]
        if d["error_study"] is None:
            del d["error_study"]
        return d

    def digest(self):
        """Hash of everything that determines the numbers (output dir excluded)."""
        d = self.to_dict()
        d.pop("output")
        d.pop("svg")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _num(name, v, positive=False, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"expected a number, got {v!r}")
    if integer and (not isinstance(v, int) and not float(v).is_integer()):
        raise ConfigError(name, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(name, "must be finite")
    if positive and not v > 0:
        raise ConfigError(name, f"must be positive, got {v!r}")
    return int(v) if integer else float(v)


def _int_list(name, v, minimum=0):
    if not isinstance(v, list) or not v:
        raise ConfigError(name, "expected a non-empty list of integers")
    out = [_num(f"{name}[{i}]", x, integer=True) for i, x in enumerate(v)]
    if any(x < minimum for x in out):
        raise ConfigError(name, f"entries must be >= {minimum}")
    return out


def from_dict(raw) -> ExperimentConfig:
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("config", "expected a non-empty JSON object")
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    raw = copy.deepcopy(raw)

    problem = raw.get("problem")
    if problem not in PROBLEMS:
        raise ConfigError("problem", f"must be one of {', '.join(PROBLEMS)}; got {problem!r}")

    iv = raw.get("interval")
    if not (isinstance(iv, list) and len(iv) == 2):
        raise ConfigError("interval", "expected [kmin, kmax]")
    kmin, kmax = _num("interval[0]", iv[0]), _num("interval[1]", iv[1])
    if not 0 <= kmin < kmax:
        raise ConfigError("interval", f"need 0 <= kmin < kmax, got [{kmin}, {kmax}]")

    zr = raw.get("z0")
    if not (isinstance(zr, list) and len(zr) == 2):
        raise ConfigError("z0", "expected [re, im]")
    z0 = complex(_num("z0[0]", zr[0]), _num("z0[1]", zr[1]))
    if not z0.real > 0:
        raise ConfigError("z0", "real part must be positive")
    if z0.imag == 0:
        raise ConfigError("z0", "imaginary part must be non-zero")

    deg = raw.get("degrees")
    if not isinstance(deg, list) or not deg:
        raise ConfigError("degrees", "expected a non-empty list of [M, N] pairs")
    degrees = []
    for i, p in enumerate(deg):
        if not (isinstance(p, list) and len(p) == 2):
            raise ConfigError(f"degrees[{i}]", "expected [M, N]")
        M = _num(f"degrees[{i}][0]", p[0], integer=True)
        N = _num(f"degrees[{i}][1]", p[1], integer=True)
        if M < 0 or N < 0:
            raise ConfigError(f"degrees[{i}]", "degrees must be non-negative")
        degrees.append((M, N))

    grid = _num("grid", raw.get("grid", DEFAULT_GRID[problem]), positive=True, integer=True)
    if problem in ("model", "transmission") and grid % 2:
        raise ConfigError("grid", "must be even")
    if problem == "scattering" and grid % 8:
        raise ConfigError("grid", "must be a multiple of 8 so the obstacle is grid-aligned")
    if grid < 4:
        raise ConfigError("grid", "must be at least 4")

    E = raw.get("E", "M+N")
    if E != "M+N":
        E = _num("E", E, integer=True)

    rho = raw.get("rho", "auto")
    if rho not in ("auto", "distance"):
        rho = _num("rho", rho, positive=True)

    study = None
    if "error_study" in raw:
        es = raw["error_study"]
        if not isinstance(es, dict):
            raise ConfigError("error_study", "expected an object with points, N, M")
        extra = sorted(set(es) - {"points", "N", "M"})
        if extra:
            raise ConfigError(f"error_study.{extra[0]}", "unknown field")
        pts = es.get("points")
        if not isinstance(pts, list) or not pts:
            raise ConfigError("error_study.points", "expected a non-empty list of real points")
        pts = [_num(f"error_study.points[{i}]", x) for i, x in enumerate(pts)]
        study = ErrorStudy(pts, _int_list("error_study.N", es.get("N")), _int_list("error_study.M", es.get("M")))

    if E != "M+N":
        pairs = list(degrees)
        if study is not None:
            pairs += [(m, n) for m in study.M for n in study.N]
        worst = max(m + n for m, n in pairs)
        if E < worst:
            raise ConfigError("E", f"fixed E={E} is below M+N={worst} for some configured degree")

    sweep = _num("sweep_points", raw.get("sweep_points", 101), positive=True, integer=True)
    seed = _num("seed", raw.get("seed", 0), integer=True)
    if seed < 0:
        raise ConfigError("seed", "must be non-negative")
    output = raw.get("output", "out")
    if not isinstance(output, str) or not output:
        raise ConfigError("output", "expected a directory path")

    phys = dict(DEFAULT_PHYSICS[problem])
    given = raw.get("physics", {})
    if not isinstance(given, dict):
        raise ConfigError("physics", "expected an object")
    for k, v in given.items():
        if k not in phys:
            raise ConfigError(f"physics.{k}", f"not a parameter of problem {problem!r}")
        phys[k] = _num(f"physics.{k}", v)
    for k in ("nu2", "kappa", "n1", "n2", "half_width", "obstacle"):
        if k in phys and not phys[k] > 0:
            raise ConfigError(f"physics.{k}", "must be positive")
    if problem == "transmission" and not 0 <= phys["theta_deg"] < 90:
        raise ConfigError("physics.theta_deg", "must lie in [0, 90)")

    sto = dict(DEFAULT_STOCHASTIC)
    given = raw.get("stochastic", {})
    if not isinstance(given, dict):
        raise ConfigError("stochastic", "expected an object")
    for k, v in given.items():
        if k not in sto:
            raise ConfigError(f"stochastic.{k}", "unknown field")
        sto[k] = v
    if sto["truth"] not in ("modal", "fd"):
        raise ConfigError("stochastic.truth", "must be 'modal' or 'fd'")
    sto["samples"] = _num("stochastic.samples", sto["samples"], positive=True, integer=True)
    sto["t_points"] = _num("stochastic.t_points", sto["t_points"], positive=True, integer=True)
    sto["t_max"] = _num("stochastic.t_max", sto["t_max"], positive=True)
    sto["modal_cutoff"] = _num("stochastic.modal_cutoff", sto["modal_cutoff"], positive=True, integer=True)

    svg = raw.get("svg", False)
    if not isinstance(svg, bool):
        raise ConfigError("svg", "expected true or false")

    return ExperimentConfig(
        problem=problem, interval=(kmin, kmax), z0=z0, degrees=degrees, grid=grid,
        E=E, rho=rho, sweep_points=sweep, seed=seed, output=output,
        physics=phys, stochastic=sto if problem == "stochastic" else {},
        error_study=study, svg=svg,
    )


def load(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    return from_dict(raw)
