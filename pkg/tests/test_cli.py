"""CLI subcommands, config handling, determinism of emitted artifacts."""

import hashlib
import json
import os
import subprocess
import sys

import pytest
import yaml

from vacmin.cli import main
from vacmin.config import ConfigError, ExperimentConfig

BASE = {
    "n": 2,
    "m": 2,
    "h": 0.1,
    "r_max": 3.0,
    "potential": {"family": "power", "zero": [0.0, 0.0], "q": 4},
    "boundary": {"tag": "angular", "magnitude": 0.6, "windings": 1},
    "solver": {"tol": 1.0e-5, "max_iter": 20000},
    "analysis": {"radii": [0.75, 1.25], "eps": 0.02, "sphere_points": 256},
    "seed": 3,
}


def write_cfg(tmp_path, name="exp.yaml", **overrides):
    cfg = json.loads(json.dumps(BASE))
    for key, val in overrides.items():
        if isinstance(val, dict):
            cfg[key] = {**cfg.get(key, {}), **val}
        else:
            cfg[key] = val
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


def run_cli(cmd, cfg_path, out_dir, *extra):
    return main([cmd, "--config", cfg_path, "--out", str(out_dir), *extra])


# ---------------------------------------------------------------------------
# config


def test_config_roundtrip(tmp_path):
    cfg = ExperimentConfig.from_dict(json.loads(json.dumps(BASE)))
    p = tmp_path / "c.yaml"
    cfg.to_yaml(str(p))
    again = ExperimentConfig.from_yaml(str(p))
    assert again.to_dict() == cfg.to_dict()
    assert again.sha256() == cfg.sha256()


def test_config_validation_messages():
    bad = json.loads(json.dumps(BASE))
    bad["h"] = -1.0
    with pytest.raises(ConfigError, match="h"):
        ExperimentConfig.from_dict(bad)
    bad2 = json.loads(json.dumps(BASE))
    bad2["analysis"] = {"radii": [99.0]}
    with pytest.raises(ConfigError, match="radii"):
        ExperimentConfig.from_dict(bad2)
    bad3 = json.loads(json.dumps(BASE))
    bad3["extra_key"] = 1
    with pytest.raises(ConfigError, match="extra_key"):
        ExperimentConfig.from_dict(bad3)
    bad4 = json.loads(json.dumps(BASE))
    del bad4["potential"]
    with pytest.raises(ConfigError, match="potential"):
        ExperimentConfig.from_dict(bad4)


def test_config_error_exit_code(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("n: 7\n")
    assert main(["minimize", "--config", str(p)]) == 2
    q = tmp_path / "broken.yaml"
    q.write_text("n: [unclosed\n")
    assert main(["minimize", "--config", str(q)]) == 2


# ---------------------------------------------------------------------------
# subcommands


def test_minimize_emits_field_and_report(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert run_cli("minimize", cfg, out) == 0
    report = json.loads((out / "solve.json").read_text())
    assert report["solve"]["converged"]
    assert "config_sha256" in report
    assert "wall_time" not in report["solve"]  # volatile data stays out
    from vacmin.field import load_field
    u = load_field(str(out / "field.bin"))
    assert u.m == 2


def test_minimize_constant_boundary_trivial(tmp_path):
    cfg = write_cfg(tmp_path, boundary={"tag": "constant"})
    out = tmp_path / "out"
    assert run_cli("minimize", cfg, out) == 0
    report = json.loads((out / "solve.json").read_text())
    assert report["solve"]["energy"] == 0.0
    assert report["solve"]["iterations"] == 0


def test_solver_failure_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, solver={"tol": 1.0e-12, "max_iter": 3})
    assert run_cli("minimize", cfg, tmp_path / "out") == 3


def test_bootstrap_report(tmp_path):
    cfg = write_cfg(tmp_path, potential={"family": "quadratic",
                                         "zero": [0.0, 0.0]})
    out = tmp_path / "out"
    assert run_cli("bootstrap", cfg, out) == 0
    rep = json.loads((out / "bootstrap.json").read_text())
    assert rep["fixed_point"] == pytest.approx(0.5, abs=1e-12)
    assert rep["closed_form"] == pytest.approx(0.5)


def test_energy_profile_csv(tmp_path):
    cfg = write_cfg(tmp_path, analysis={"radii": [1.0, 1.5, 2.0, 2.5]})
    out = tmp_path / "out"
    assert run_cli("energy-profile", cfg, out) == 0
    lines = (out / "energy_profile.csv").read_text().strip().splitlines()
    assert lines[0] == "R,E,E_norm,E_norm_tau"
    assert len(lines) == 5
    rep = json.loads((out / "energy_profile.json").read_text())
    assert "diagnostic" in rep


def test_bad_discs_artifacts(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert run_cli("bad-discs", cfg, out) == 0
    rep = json.loads((out / "bad_discs.json").read_text())
    assert len(rep["reports"]) == 2
    for r in rep["reports"]:
        assert r["offdisc_sup"] <= r["eps"]
    assert (out / "sphere_samples_0.csv").exists()


def test_monotonicity_subcommand(tmp_path):
    cfg = write_cfg(tmp_path, analysis={"radii": [0.5, 1.0, 1.5, 2.0, 2.5]})
    out = tmp_path / "out"
    assert run_cli("monotonicity", cfg, out) == 0
    rep = json.loads((out / "monotonicity.json").read_text())
    assert rep["monotonicity"]["weak_violations"] == []


def test_competitor_subcommand(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert run_cli("competitor", cfg, out) == 0
    rep = json.loads((out / "competitors.json").read_text())
    dq = rep["delta_q"]
    for r in rep["reports"]:
        if r["admissible"]:
            assert r["difference"] >= -dq


def test_max_principle_subcommand(tmp_path):
    cfg = write_cfg(tmp_path,
                    boundary={"tag": "random", "magnitude": 0.25, "seed": 5},
                    analysis={"r": 0.25},
                    solver={"tol": 1.0e-6, "max_iter": 40000})
    out = tmp_path / "out"
    assert run_cli("max-principle", cfg, out) == 0
    rep = json.loads((out / "max_principle.json").read_text())
    assert rep["verdict"]["holds"]


def test_verify_potential_subcommand(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert run_cli("verify-potential", cfg, out) == 0
    rep = json.loads((out / "potential_assumptions.json").read_text())
    assert rep["positive_ok"] and rep["lower_bound_ok"]
    # invalid potential reports failure through the exit code
    bad = write_cfg(tmp_path, name="bad.yaml",
                    potential={"family": "anisotropic", "zero": [0.0, 0.0],
                               "coeffs": [-1.0, 1.0], "powers": [2, 4]})
    assert run_cli("verify-potential", bad, tmp_path / "out2") == 4


def test_seed_override_changes_hash(tmp_path):
    cfg = write_cfg(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run_cli("bootstrap", cfg, out1) == 0
    assert run_cli("bootstrap", cfg, out2, "--seed", "99") == 0
    h1 = json.loads((out1 / "bootstrap.json").read_text())["config_sha256"]
    h2 = json.loads((out2 / "bootstrap.json").read_text())["config_sha256"]
    assert h1 != h2


# ---------------------------------------------------------------------------
# determinism


def _tree_digest(root):
    out = {}
    for name in sorted(os.listdir(root)):
        with open(os.path.join(root, name), "rb") as f:
            out[name] = hashlib.sha256(f.read()).hexdigest()
    return out


@pytest.mark.parametrize("cmd", ["minimize", "energy-profile", "bad-discs",
                                 "competitor"])
def test_rerun_is_byte_identical(tmp_path, cmd):
    cfg = write_cfg(tmp_path, analysis={"radii": [0.75, 1.25]})
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert run_cli(cmd, cfg, out1) == 0
    assert run_cli(cmd, cfg, out2) == 0
    assert _tree_digest(out1) == _tree_digest(out2)


def test_rerun_byte_identical_subprocess(tmp_path):
    # separate interpreter runs, same artifacts
    cfg = write_cfg(tmp_path)
    outs = []
    for name in ("s1", "s2"):
        out = tmp_path / name
        r = subprocess.run(
            [sys.executable, "-m", "vacmin.cli", "minimize",
             "--config", cfg, "--out", str(out)],
            capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append(_tree_digest(out))
    assert outs[0] == outs[1]
