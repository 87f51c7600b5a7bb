import json

import pytest

from neutralflow.cli import main
from neutralflow.config import parse_config_dict
from neutralflow.errors import ConfigError

LOOP = {
    "network": {"vertices": 1, "edges": [{"tail": 0, "head": 0, "weight": 1.0}]},
    "control": {"K": [[1.0]]},
    "delays": {"r": 1.0},
    "grid": {"N": 12},
    "mu": {"count": 24},
    "sim": {"dt": 0.05, "t_final": 1.0},
}

TWO_LOOPS = {
    "network": {
        "vertices": 2,
        "require_connected": False,
        "edges": [
            {"tail": 0, "head": 0, "weight": 1.0},
            {"tail": 1, "head": 1, "weight": 1.0},
        ],
    },
    "control": {"K": [[1.0], [0.0]]},
    "delays": {"r": 1.0},
    "grid": {"N": 12},
    "mu": {"count": 24},
}


def write_cfg(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_parse_minimal_config():
    cfg = parse_config_dict(LOOP)
    assert cfg.net.m == 1 and cfg.grid_n == 12 and cfg.mu_count == 24
    assert cfg.control.n_v == 1 and cfg.control.n_u == 0
    assert cfg.bank.r == 1.0


def test_missing_weight_reported_with_path():
    bad = json.loads(json.dumps(LOOP))
    del bad["network"]["edges"][0]["weight"]
    with pytest.raises(ConfigError) as exc:
        parse_config_dict(bad)
    assert any(p == "$.network.edges[0].weight" for p, _ in exc.value.issues)


def test_atom_at_zero_rejected_with_path():
    bad = json.loads(json.dumps(LOOP))
    bad["delays"]["eta"] = {"atoms": [{"theta": 0.0, "matrix": [[0.5]]}]}
    with pytest.raises(ConfigError) as exc:
        parse_config_dict(bad)
    assert any("$.delays.eta.atoms[0].theta" == p for p, _ in exc.value.issues)


def test_all_issues_collected_at_once():
    bad = json.loads(json.dumps(LOOP))
    del bad["network"]["edges"][0]["weight"]
    bad["network"]["edges"][0]["head"] = 5
    with pytest.raises(ConfigError) as exc:
        parse_config_dict(bad)
    assert len(exc.value.issues) >= 2


def test_validate_exit_zero(tmp_path, capsys):
    cfg = write_cfg(tmp_path, LOOP)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "validate"]) == 0
    report = json.loads((out / "validate.json").read_text())
    assert report["edges"] == 1 and report["valid"] is True
    assert abs(report["travel_times"][0] - 1.0) < 1e-12


def test_bad_config_exit_one(tmp_path, capsys):
    bad = json.loads(json.dumps(LOOP))
    del bad["network"]["edges"][0]["weight"]
    cfg = write_cfg(tmp_path, bad)
    assert main(["--config", cfg, "--out", str(tmp_path / "o"), "validate"]) == 1
    assert "$.network.edges[0].weight" in capsys.readouterr().err


def test_spectrum_finds_boundary_lattice(tmp_path, capsys):
    cfg = write_cfg(tmp_path, LOOP)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "spectrum"]) == 0
    lines = (out / "spectrum.csv").read_text().strip().splitlines()
    assert lines[0] == "re,im,family,residual"
    rows = [ln.split(",") for ln in lines[1:]]
    # default box [-1,1] x [-7i,7i] holds exactly 0 and +-2*pi*i
    assert len(rows) == 3
    ims = sorted(float(r[1]) for r in rows)
    assert abs(ims[0] + 2 * 3.141592653589793) < 1e-9
    assert abs(ims[1]) < 1e-9
    assert all(float(r[3]) < 1e-9 for r in rows)


def test_resolvent_check_exit_zero(tmp_path, capsys):
    cfg = write_cfg(tmp_path, LOOP)
    out = tmp_path / "out"
    rc = main(["--config", cfg, "--out", str(out), "--grid", "64",
               "resolvent-check", "--trials", "3", "--tol", "1e-8"])
    assert rc == 0
    report = json.loads((out / "resolvent_check.json").read_text())
    assert report["pass"] is True and report["max_rel_error"] <= 1e-8


def test_controllable_loop_exit_zero(tmp_path, capsys):
    cfg = write_cfg(tmp_path, LOOP)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "controllability"]) == 0
    report = json.loads((out / "controllability.json").read_text())
    assert report["verdict"] == "controllable-at-grid" and report["defect"] == 0.0


def test_defective_system_exit_two(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TWO_LOOPS)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "controllability"]) == 2
    report = json.loads((out / "controllability.json").read_text())
    assert report["verdict"] == "defective"
    assert abs(report["defect"] - 0.5) < 1e-12
    sv_lines = (out / "singular_values.csv").read_text().strip().splitlines()
    assert len(sv_lines) == 1 + report["dim"]


def test_reports_byte_identical(tmp_path, capsys):
    cfg = write_cfg(tmp_path, TWO_LOOPS)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", cfg, "--out", str(a), "controllability"]) == 2
    assert main(["--config", cfg, "--out", str(b), "controllability"]) == 2
    assert (a / "controllability.json").read_bytes() == (b / "controllability.json").read_bytes()
    assert (a / "singular_values.csv").read_bytes() == (b / "singular_values.csv").read_bytes()


def test_simulate_writes_artifacts(tmp_path, capsys):
    cfg = write_cfg(tmp_path, LOOP)
    out = tmp_path / "out"
    assert main(["--config", cfg, "--out", str(out), "simulate"]) == 0
    manifest = json.loads((out / "simulate.json").read_text())
    assert manifest["steps"] == 20 and manifest["dt"] == 0.05
    ts = (out / "timeseries.csv").read_text().strip().splitlines()
    assert ts[0] == "t,mass,norm" and len(ts) == 22
    traj = (out / "trajectory.csv").read_text().strip().splitlines()
    assert traj[0] == "t,edge,x,z,rho"
