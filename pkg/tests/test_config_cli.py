import json
import subprocess
import sys

import numpy as np
import pytest

from hamshoot.config import loads_config
from hamshoot.errors import ConfigParseError, ValidationError

MINIMAL = """
mode: periodic
M: 1
T: 6.283185307179586
hamiltonian: {preset: pendulum, A: 1.0}
planar: {preset: asymmetric, mu1: 4.0, nu1: 1.0}
coupling: {expr: "0.1*sin(x)*sin(u)"}
"""


def test_minimal_config_loads():
    cfg = loads_config(MINIMAL)
    assert cfg.mode == "periodic"
    assert cfg.M == 1
    sys_ = cfg.system
    assert sys_.dim == 4
    assert sys_.w_kink
    assert sys_.decomposition is not None


def test_system_field_matches_hand_written():
    cfg = loads_config(MINIMAL)
    from hamshoot.systems import assemble_field
    f = assemble_field(cfg.system)
    z = np.array([0.3, -0.2, 0.5, 0.7])
    out = f(0.4, z)
    # q' = p, p' = -sin q - dP/dq, u' = v, v' = -(4 u+)- dP/du
    assert out[0] == pytest.approx(-0.2)
    assert out[1] == pytest.approx(-np.sin(0.3) - 0.1 * np.cos(0.3) * np.sin(0.5))
    assert out[2] == pytest.approx(0.7)
    assert out[3] == pytest.approx(-4 * 0.5 - 0.1 * np.sin(0.3) * np.cos(0.5))


def test_unknown_variable_rejected():
    bad = MINIMAL.replace("sin(x)*sin(u)", "sin(x3)*sin(u)")
    with pytest.raises(ValidationError) as ei:
        loads_config(bad)
    assert any("x3" in p for p in ei.value.problems)


def test_stiffness_ordering_rejected():
    bad = MINIMAL.replace("mu1: 4.0", "mu1: 4.0, mu2: 1.0")
    with pytest.raises(ValidationError) as ei:
        loads_config(bad)
    assert any("mu2" in p for p in ei.value.problems)


def test_all_violations_collected():
    bad = """
mode: sideways
M: -2
hamiltonian: {preset: pendulum, A: -1.0}
planar: {preset: asymmetric, mu1: -3.0, nu1: 1.0}
"""
    with pytest.raises(ValidationError) as ei:
        loads_config(bad)
    assert len(ei.value.problems) >= 4


def test_mode_shape_validation():
    with pytest.raises(ValidationError):
        loads_config("mode: periodic\nM: 1\ninterval: [0, 1]\n"
                     "planar: {preset: asymmetric}")
    with pytest.raises(ValidationError):
        loads_config("mode: neumann\nM: 1\nT: 5.0\nplanar: {preset: asymmetric}")
    cfg = loads_config("mode: neumann\nM: 1\ninterval: [0.0, 1.0]\n"
                       "planar: {preset: asymmetric, mu1: 1.0, nu1: 1.0}")
    assert cfg.system.mode == "neumann"


def test_invalid_yaml_is_parse_error():
    with pytest.raises(ConfigParseError):
        loads_config("mode: [unclosed")
    with pytest.raises(ConfigParseError):
        loads_config("- just\n- a list\n")


def test_expr_planar_block_with_decomposition():
    cfg = loads_config("""
mode: periodic
M: 0
T: 6.283185307179586
hamiltonian: {preset: free_rotator}
planar:
  preset: expr
  K: "0.5*(u^2 + v^2) + ln(1 + u^2)"
  H1: "0.5*(u^2 + v^2)"
  H2: "1.0*(u^2 + v^2)"
  Q: "ln(1 + u^2)"
""")
    sys_ = cfg.system
    w = np.array([0.4, -0.3])
    expect = np.array([0.4 + 2 * 0.4 / (1 + 0.16), -0.3])
    assert np.allclose(sys_.F(0.0, w), expect)
    assert sys_.decomposition is not None


def test_seed_and_params():
    cfg = loads_config(MINIMAL + "seed: 7\nparams: {eps: 0.25}\n")
    assert cfg.seed == 7
    assert cfg.params["eps"] == 0.25


# ---------------------------------------------------------------------------
# CLI end to end
# ---------------------------------------------------------------------------

FAST_CONFIG = """
mode: periodic
M: 1
T: 6.283185307179586
seed: 0
hamiltonian: {preset: pendulum, A: 1.0}
planar: {preset: asymmetric, mu1: 4.0, nu1: 1.0}
coupling: {expr: "0.1*sin(x)*sin(u)"}
solver:
  newton_tol: 1.0e-9
  multistart:
    x_points: 2
    y_ranges: [[-0.5, 0.5]]
    y_points: 1
    w_radii: [0.2]
    w_angles: 2
conditions:
  twist:
    enabled: true
    D: [[-8.0, 8.0]]
    sigma: [1]
    x_points: 3
    y_points: 1
    ensemble:
      constants: [[0.0, 0.0]]
"""


def _run_cli(args):
    return subprocess.run([sys.executable, "-m", "hamshoot.cli"] + args,
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    cfg = tmp_path_factory.mktemp("cfg") / "exp.yaml"
    cfg.write_text(FAST_CONFIG)
    out = tmp_path_factory.mktemp("out")
    proc = _run_cli(["full", "--config", str(cfg), "--out", str(out)])
    return cfg, out, proc


def test_cli_full_runs_clean(cli_run):
    cfg, out, proc = cli_run
    assert proc.returncode == 0, proc.stderr
    assert "distinct_classes >= 2: PASS" in proc.stdout
    for name in ("results.json", "solutions.csv", "periods.csv", "conditions.csv"):
        assert (out / name).exists()


def test_cli_results_json_contents(cli_run):
    _, out, _ = cli_run
    data = json.loads((out / "results.json").read_text())
    assert data["resonance"]["tag"] == "Nonresonant"
    assert data["resonance"]["N"] == 1
    assert data["summary"]["meets_bound"] is True
    assert data["conditions"]["twist"]["passed"] is True
    assert data["metadata"]["config_hash"]
    assert data["periods"]["H1"]["tau"] == pytest.approx(1.5 * np.pi, rel=1e-12)


def test_cli_csv_headers_and_roundtrip_floats(cli_run):
    _, out, _ = cli_run
    lines = (out / "solutions.csv").read_text().splitlines()
    assert lines[0].startswith("mode,class,x0_1,y0_1,u0,v0,residual")
    val = lines[1].split(",")[6]
    assert float(val) == float(f"{float(val):.17g}")  # 17 sig digits round-trip
    assert (out / "periods.csv").read_text().splitlines()[0] == \
        "block,label,tau,tau_plus,tau_minus"


def test_cli_determinism(cli_run, tmp_path):
    cfg, out, _ = cli_run
    out2 = tmp_path / "again"
    proc = _run_cli(["full", "--config", str(cfg), "--out", str(out2)])
    assert proc.returncode == 0
    assert (out / "solutions.csv").read_bytes() == (out2 / "solutions.csv").read_bytes()
    a = json.loads((out / "results.json").read_text())
    b = json.loads((out2 / "results.json").read_text())
    for d in (a, b):
        d["metadata"].pop("wall_time_s")
        d["metadata"].pop("timestamp_utc")
    assert a == b


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("mode: periodic\nM: 1\nT: -3\nplanar: {preset: asymmetric}\n")
    proc = _run_cli(["periods", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert proc.returncode == 2
    assert "config error" in proc.stderr


def test_cli_missing_file_exit_code(tmp_path):
    proc = _run_cli(["periods", "--config", str(tmp_path / "nope.yaml"),
                     "--out", str(tmp_path / "o")])
    assert proc.returncode == 2


def test_cli_mode_mismatch(tmp_path, cli_run):
    cfg, _, _ = cli_run
    proc = _run_cli(["solve-neumann", "--config", str(cfg),
                     "--out", str(tmp_path / "o")])
    assert proc.returncode == 2


def test_cli_periods_subcommand(tmp_path, cli_run):
    cfg, _, _ = cli_run
    out = tmp_path / "p"
    proc = _run_cli(["periods", "--config", str(cfg), "--out", str(out)])
    assert proc.returncode == 0
    rows = (out / "periods.csv").read_text().splitlines()
    assert len(rows) == 3  # header + H1 + H2
    tau = float(rows[1].split(",")[2])
    assert tau == pytest.approx(1.5 * np.pi, rel=1e-12)


def test_cli_classify_subcommand(tmp_path, cli_run):
    cfg, _, _ = cli_run
    out = tmp_path / "c"
    proc = _run_cli(["classify", "--config", str(cfg), "--out", str(out)])
    assert proc.returncode == 0
    assert "Nonresonant(N=1)" in proc.stdout


def test_cli_dump_trajectories(tmp_path, cli_run):
    cfg, _, _ = cli_run
    out = tmp_path / "t"
    proc = _run_cli(["solve-periodic", "--config", str(cfg), "--out", str(out),
                     "--dump-trajectories"])
    assert proc.returncode == 0
    dumps = sorted((out / "trajectories").glob("class_*.csv"))
    assert dumps
    header = dumps[0].read_text().splitlines()[0]
    assert header == "t,z_1,z_2,z_3,z_4"


def test_cli_neumann_solve(tmp_path):
    cfg = tmp_path / "neu.yaml"
    cfg.write_text("""
mode: neumann
M: 1
interval: [0.0, 1.0]
hamiltonian: {preset: free_rotator}
planar: {preset: asymmetric, mu1: 1.0, nu1: 1.0}
solver:
  neumann_multistart: {x_points: 4, u_points: 3}
""")
    out = tmp_path / "o"
    proc = _run_cli(["solve-neumann", "--config", str(cfg), "--out", str(out)])
    assert proc.returncode == 0, proc.stderr
    lines = (out / "solutions.csv").read_text().splitlines()
    assert lines[0] == "mode,class,xa_1,u_a,residual,iterations"
    assert len(lines) >= 3  # several distinct x_a classes
    assert all(abs(float(l.split(",")[3])) < 1e-9 for l in lines[1:])
