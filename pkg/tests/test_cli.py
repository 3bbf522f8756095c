import json

import pytest

from ptails.cli import main
from ptails.config import ConfigError, parse_config


def test_parse_config_roundtrip(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("""
# comment
[grid]
n_points = 1024
half_length = 300.0

[simulate]
t_final = 10.0  # trailing comment
""")
    cfg = parse_config(p)
    assert cfg["grid"]["n_points"] == "1024"
    assert cfg["simulate"]["t_final"] == "10.0"


def test_parse_config_line_numbered_errors(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("[grid]\nn_points 1024\n")
    with pytest.raises(ConfigError) as exc:
        parse_config(p)
    assert exc.value.line_no == 2


def test_parse_config_key_outside_section(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("n_points = 4\n")
    with pytest.raises(ConfigError):
        parse_config(p)


def test_cli_special_emits_table(tmp_path):
    code = main(["-o", str(tmp_path), "special", "--n", "1",
                 "--range=-20:20", "--points", "101"])
    assert code == 0
    table = tmp_path / "fn_n1.csv"
    assert table.exists()
    header = table.read_text().splitlines()[0]
    assert header == "z,fn,fn_d1,fn_d2,fn_d3,ode_residual"
    manifest = json.loads((tmp_path / "manifest_special.json").read_text())
    assert str(table) in manifest["outputs"]
    assert manifest["verdicts"]["passed"] is True


def test_cli_malformed_config_exit_2(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[grid]\nwhat even is this line\n")
    code = main(["-c", str(bad), "-o", str(tmp_path), "special"])
    assert code == 2


def test_cli_profiles_subcommand(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("[profiles]\nalpha = 0.5\ngamma = 0.1\nn_max = 1\n")
    code = main(["-c", str(cfg), "-o", str(tmp_path), "profiles"])
    assert code == 0
    assert (tmp_path / "g0.csv").exists()
    assert (tmp_path / "g1p.csv").exists()


def test_cli_bounds_deterministic(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    cfg = tmp_path / "b.cfg"
    cfg.write_text("[bounds]\nt_max = 50.0\nn_t = 12\n")
    assert main(["-c", str(cfg), "-o", str(out1), "bounds"]) == 0
    assert main(["-c", str(cfg), "-o", str(out2), "bounds"]) == 0
    b1 = (out1 / "bound_kernels.csv").read_bytes()
    b2 = (out2 / "bound_kernels.csv").read_bytes()
    assert b1 == b2


def test_cli_simulate_manifest_lists_every_output(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("""
[grid]
n_points = 1024
half_length = 120.0
[simulate]
t_final = 10.0
snapshots = 10
csv_snapshots = 3
""")
    code = main(["-c", str(cfg), "-o", str(tmp_path), "simulate"])
    assert code == 0
    manifest = json.loads((tmp_path / "manifest_simulate.json").read_text())
    written = {str(p) for p in tmp_path.glob("*.csv")}
    assert written == set(manifest["outputs"])


def test_cli_verify_subcommand(tmp_path):
    cfg = tmp_path / "v.cfg"
    cfg.write_text("""
[grid]
n_points = 4096
half_length = 450.0
[simulate]
t_final = 150.0
snapshots = 60
[verify]
d1_tolerance = 10.0
require_tail = false   # the tail ranking needs later times than this scale
""")
    code = main(["-c", str(cfg), "-o", str(tmp_path), "verify"])
    assert code == 0
    assert (tmp_path / "decay_fits.csv").exists()
    assert (tmp_path / "remainder_norms.csv").exists()
    manifest = json.loads((tmp_path / "manifest_verify.json").read_text())
    quantities = {f["quantity"] for f in manifest["verdicts"]["fits"]}
    assert {"+_N0_raw", "+_N1", "-_N0_raw", "-_N1"} <= quantities


def test_cli_semigroup_subcommand(tmp_path):
    cfg = tmp_path / "g.cfg"
    cfg.write_text("[semigroup]\nn_k = 201\n")
    code = main(["-c", str(cfg), "-o", str(tmp_path), "semigroup"])
    assert code == 0
    assert (tmp_path / "semigroup_bounds.csv").exists()


def test_cli_unknown_subcommand_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["definitely-not-a-command"])
    assert exc.value.code == 2
