import json
import math
from pathlib import Path

import numpy as np
import pytest

from pade_mor import cli, csvio, experiments
from pade_mor.config import ExperimentConfig, from_dict
from pade_mor.errors import ConfigError, SolverError
from pade_mor.maps import spectral_oracle
from pade_mor.pade import pade

Z0 = 10 + 0.5j


def small_stochastic(out, seed=7):
    return {
        "problem": "stochastic",
        "interval": [7, 14],
        "z0": [10, 0.5],
        "degrees": [[2, 3], [4, 3], [6, 3]],
        "sweep_points": 11,
        "seed": seed,
        "output": str(out),
        "stochastic": {"samples": 2000, "t_max": 5.0, "t_points": 11, "truth": "modal", "modal_cutoff": 10},
    }


def small_model(out):
    return {
        "problem": "model",
        "grid": 16,
        "interval": [39, 55],
        "z0": [47, 0.5],
        "degrees": [[4, 2]],
        "error_study": {"points": [51], "N": [0, 2], "M": [2, 4]},
        "sweep_points": 5,
        "output": str(out),
        "svg": True,
    }


def write_cfg(tmp_path, raw, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(raw))
    return str(p)


# --- configuration -----------------------------------------------------------

@pytest.mark.parametrize(
    "patch,field",
    [
        ({"problem": "heat"}, "problem"),
        ({"z0": [10, 0]}, "z0"),
        ({"z0": [-1, 0.5]}, "z0"),
        ({"interval": [14, 7]}, "interval"),
        ({"degrees": [[2, -1]]}, "degrees[0]"),
        ({"degrees": []}, "degrees"),
        ({"grid": 15}, "grid"),
        ({"E": 3}, "E"),
        ({"rho": -2}, "rho"),
        ({"rho": "huge"}, "rho"),
        ({"colour": "red"}, "colour"),
        ({"physics": {"theta_deg": 95}}, "physics.theta_deg"),
        ({"svg": "yes"}, "svg"),
    ],
)
def test_config_field_errors(tmp_path, patch, field):
    raw = small_model(tmp_path) | {"problem": "transmission", "physics": {}} | patch
    if "physics" in patch and patch["physics"] == {"theta_deg": 95}:
        raw["problem"] = "transmission"
    with pytest.raises(ConfigError) as err:
        from_dict(raw)
    assert err.value.field == field


def test_config_round_trip_and_digest(tmp_path):
    cfg = from_dict(small_model(tmp_path))
    assert isinstance(cfg, ExperimentConfig)
    again = from_dict(cfg.to_dict())
    assert again.digest() == cfg.digest()
    moved = from_dict(small_model(tmp_path / "elsewhere"))
    assert moved.digest() == cfg.digest()
    assert cfg.resolve_E(4, 2) == 6


def test_presets_validate():
    for name in cli.PRESETS:
        cfg = from_dict(cli.preset_dict(name))
        assert cfg.problem in ("model", "transmission", "scattering", "stochastic")
    s7 = from_dict(cli.preset_dict("section7"))
    assert s7.degrees == [(2, 3), (4, 3), (6, 3)]
    s6 = from_dict(cli.preset_dict("section6"))
    assert s6.interval == (39.0, 55.0) and s6.sweep_points == 101


# --- exit codes --------------------------------------------------------------

def test_empty_config_exits_2(tmp_path, capsys):
    assert cli.main(["run", write_cfg(tmp_path, {})]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_and_invalid_files_exit_2(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["validate", str(bad)]) == 2


def test_field_message_on_stderr(tmp_path, capsys):
    raw = small_model(tmp_path) | {"z0": [47, 0]}
    assert cli.main(["run", write_cfg(tmp_path, raw)]) == 2
    assert "z0" in capsys.readouterr().err


def test_solver_failure_exits_3(tmp_path, monkeypatch, capsys):
    def boom(cfg):
        raise SolverError("singular band factorization at shift 8", shift=8.0)

    monkeypatch.setattr(experiments, "run", boom)
    assert cli.main(["run", write_cfg(tmp_path, small_model(tmp_path / "o"))]) == 3
    assert "solver error" in capsys.readouterr().err


def test_validate_ok(tmp_path, capsys):
    assert cli.main(["validate", write_cfg(tmp_path, small_model(tmp_path))]) == 0
    assert "ok" in capsys.readouterr().out


# --- outputs -----------------------------------------------------------------

@pytest.fixture(scope="module")
def model_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("model")
    assert cli.main(["run", write_cfg(out, small_model(out / "res"))]) == 0
    return out / "res"


def test_model_outputs_and_schemas(model_run):
    files = {p.name for p in model_run.iterdir()}
    assert {"sweep.csv", "roots.csv", "error_vs_M.csv", "roots_vs_M.csv", "manifest.json"} <= files
    assert {"sweep.svg", "error_vs_M.svg"} <= files
    for name, schema in [("sweep", "sweep"), ("roots", "roots"), ("error_vs_M", "error_vs_M"), ("roots_vs_M", "roots")]:
        meta, cols, rows = csvio.read(model_run / f"{name}.csv")
        assert meta["schema"] == f"pade-mor/{schema}/v1"
        assert cols == csvio.SCHEMAS[schema]
        assert rows and all(len(r) == len(cols) for r in rows)
        assert "config_hash" in meta and "weight" in meta
    _, _, ev = csvio.read(model_run / "error_vs_M.csv")
    assert len(ev) == 4


def test_manifest_contents(model_run):
    man = json.loads((model_run / "manifest.json").read_text())
    assert man["config_hash"] == from_dict(man["config"]).digest()
    assert set(man["versions"]) >= {"pade_mor", "numpy", "scipy", "python"}
    assert man["kernel_backend"] in ("cython", "python")
    assert "sweep.csv" in man["files"]


def test_rerun_from_manifest_is_bit_exact(model_run, tmp_path):
    man = json.loads((model_run / "manifest.json").read_text())
    raw = man["config"] | {"output": str(tmp_path / "again")}
    assert cli.main(["run", write_cfg(tmp_path, raw)]) == 0
    for name in ("sweep.csv", "roots.csv", "error_vs_M.csv", "roots_vs_M.csv"):
        assert (tmp_path / "again" / name).read_bytes() == (model_run / name).read_bytes()


def test_stochastic_outputs_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", write_cfg(tmp_path, small_stochastic(a), "a.json")]) == 0
    assert cli.main(["run", write_cfg(tmp_path, small_stochastic(b), "b.json")]) == 0
    for name in ("samples.csv", "chf.csv", "rates.csv", "sweep.csv", "roots.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    meta, cols, rows = csvio.read(a / "rates.csv")
    assert meta["seed"] == "7"
    assert [int(r[0]) for r in rows] == [2, 4, 6]
    assert all(int(r[1]) == 3 for r in rows)
    _, _, s = csvio.read(a / "samples.csv")
    assert {int(r[2]) for r in s} == {2, 4, 6}


def test_seed_changes_samples(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["run", write_cfg(tmp_path, small_stochastic(a, 1), "a.json")])
    cli.main(["run", write_cfg(tmp_path, small_stochastic(b, 2), "b.json")])
    assert (a / "samples.csv").read_bytes() != (b / "samples.csv").read_bytes()


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    monkeypatch.setenv("PADE_MOR_THREADS", "1")
    cli.main(["run", write_cfg(tmp_path, small_model(tmp_path / "one"), "1.json")])
    monkeypatch.setenv("PADE_MOR_THREADS", "4")
    cli.main(["run", write_cfg(tmp_path, small_model(tmp_path / "four"), "4.json")])
    for name in ("sweep.csv", "error_vs_M.csv"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "four" / name).read_bytes()


def test_preset_overrides(tmp_path, monkeypatch):
    seen = {}

    def fake_run(cfg):
        seen["cfg"] = cfg
        return []

    monkeypatch.setattr(experiments, "run", fake_run)
    assert cli.main(["preset", "section6", "--out", str(tmp_path), "--seed", "3", "--grid", "32"]) == 0
    cfg = seen["cfg"]
    assert (cfg.output, cfg.seed, cfg.grid) == (str(tmp_path), 3, 32)
    assert cli.main(["preset", "section5", "--grid", "30"]) == 2


# --- study helpers -----------------------------------------------------------

def test_sweep_single_pole_exact():
    o = spectral_oracle([8.0], [1.0], Z0)
    A = pade(o, 2, 1, 4.0)
    rows = experiments.sweep_norm(o, [A], np.linspace(7, 14, 15), [8.0])
    errs = [r[7] for r in rows if r[8] == "ok"]
    assert len(errs) == 14 and max(errs) <= 1e-10
    # z = 8 is both the true pole and the surrogate root
    assert [r[8] for r in rows if r[0] == 8.0] == ["surrogate_pole"]


def test_sweep_single_point_at_center():
    o = spectral_oracle([8.0, 13.0], [1, 2], Z0)
    A = pade(o, 3, 1, 4.0)
    (row,) = experiments.sweep_norm(o, [A], np.array([Z0]), None)
    assert row[0] == Z0.real
    assert row[6] == pytest.approx(o.space.norm(A.numerator[0] / A.denominator.coeffs[0]), rel=1e-14)


def test_sweep_flags_truth_pole():
    o = spectral_oracle([8.0, 13.0], [1, 2], Z0)
    A = pade(o, 3, 1, 4.0)
    rows = experiments.sweep_norm(o, [A], np.array([8.0, 9.0]), [8.0, 13.0])
    assert math.isfinite(rows[0][5])


def test_root_matching_greedy():
    m = experiments.match_roots([8.1, 8.05, 30.0], [8.0, 10.0])
    assert m[1][0] == 0 and m[0][0] == 1 and m[2][0] == -1
    assert m[1][2] == pytest.approx(0.05)


def test_root_convergence_single_pole():
    o = spectral_oracle([8.0], [1.0], Z0)
    for M in range(1, 6):
        rows = experiments.root_convergence([pade(o, M, 1, 4.0)], [8.0])
        assert rows[0][7] <= 1e-12


def test_root_convergence_three_poles():
    o = spectral_oracle([8.0, 10.0, 13.0], [1, 1, 1], Z0)
    rows = experiments.root_convergence([pade(o, 10, 3, 4.03)], o.sorted_poles())
    assert sorted(r[6] for r in rows) == [8.0, 10.0, 13.0]
    assert max(r[7] for r in rows) <= 1e-6


def test_error_vs_M_slope_tracks_heuristic(tmp_path):
    o = spectral_oracle([8.0, 10.0, 13.0, 17.0, 20.0], [1, 1, 1, 1, 1], Z0)
    raw = small_stochastic(tmp_path) | {"degrees": [[2, 3]], "rho": 4.0}
    cfg = from_dict(raw)
    from pade_mor.pade import TaylorTable

    T = TaylorTable.from_map(o, 13)
    rows = experiments.error_vs_M(o, T, [12.0], list(range(2, 11)), [3], cfg, o.sorted_poles())
    M = np.array([r[1] for r in rows])
    err = np.array([r[5] for r in rows])
    hr = np.array([r[7] for r in rows])
    s_err = np.polyfit(M, np.log(err), 1)[0]
    s_hr = np.polyfit(M, np.log(hr), 1)[0]
    assert 0.5 * s_hr >= s_err >= 2 * s_hr
    assert all(math.isfinite(r[6]) for r in rows)
