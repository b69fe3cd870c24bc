import json
import os

import pytest

from heisenmod.cli import ConfigError, load_config, main, parse_vector_tag


def run(tmp_path, *argv):
    return main(list(argv) + ["--out", str(tmp_path)])


# -- configuration -------------------------------------------------------------

def test_load_config_defaults():
    cfg = load_config()
    assert cfg["norm"] == "euclidean"
    assert cfg["seed"] == 7


def test_load_config_rejects_unknown_field(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"not_a_field": 1}')
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_load_config_rejects_bad_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"p": 1,,}')
    with pytest.raises(ConfigError, match="line"):
        load_config(str(path))


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/cfg.json")


def test_validation_d_multiple_of_q(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"p": 1, "q": 2, "d": 3}')
    with pytest.raises(ConfigError, match="multiple"):
        load_config(str(path))


def test_validation_degenerate_theta(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"p": 1, "q": 2, "d": 2, "theta": 0.5}')
    with pytest.raises(ConfigError):
        load_config(str(path))


def test_parse_vector_tag():
    v = parse_vector_tag("gaussian", 1.0)
    assert v.dim == 1
    h = parse_vector_tag("hermite:3", 0.7)
    assert h.dim == 1
    d = parse_vector_tag("dilated:2.0:gaussian", 1.0)
    assert d.dim == 1
    with pytest.raises(ConfigError):
        parse_vector_tag("bogus", 1.0)


# -- exit codes ----------------------------------------------------------------

def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 3, "q": 2, "p": 1}')
    rc = main(["invariants", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 2


def test_unknown_param_exit_code(tmp_path):
    rc = main(["invariants", "--param", "nope=1", "--out", str(tmp_path)])
    assert rc == 2


def test_malformed_param_exit_code(tmp_path):
    rc = main(["invariants", "--param", "justakey", "--out", str(tmp_path)])
    assert rc == 2


def test_invariants_pass(tmp_path):
    rc = run(tmp_path, "invariants")
    assert rc == 0
    report = json.loads((tmp_path / "invariants.json").read_text())
    assert report["passed"] is True
    names = [c["name"] for c in report["checks"]]
    assert "cocycle_identity" in names
    assert all(c["passed"] for c in report["checks"])


def test_invariants_break_tolerance(tmp_path):
    rc = main(["invariants", "--param", "break_tolerance=true",
               "--out", str(tmp_path)])
    assert rc == 1
    report = json.loads((tmp_path / "invariants.json").read_text())
    assert report["passed"] is False


# -- experiment outputs --------------------------------------------------------

def test_inner_product_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert main(["inner-product", "--out", str(a),
                 "--param", "box_radius=8"]) == 0
    assert main(["inner-product", "--out", str(b),
                 "--param", "box_radius=8"]) == 0
    ta = (a / "inner_product.txt").read_bytes()
    tb = (b / "inner_product.txt").read_bytes()
    assert ta == tb
    assert b"theta " in ta


def test_dnorm_sweep_output(tmp_path):
    rc = main(["dnorm-sweep", "--out", str(tmp_path),
               "--param", "directions=8", "--param", "t_samples=5",
               "--param", "box_radius=8", "--param", "k_max=2"])
    assert rc == 0
    lines = (tmp_path / "dnorm_sweep.csv").read_text().splitlines()
    assert lines[0].startswith("# fingerprint=")
    assert lines[1] == "k,theta,lower,upper,gap_to_limit"
    assert len(lines) == 2 + 3 + 1          # header rows + k rows + inf row
    assert lines[-1].startswith("inf,")
    for line in lines[2:-1]:
        _, _, lo, up, _ = line.split(",")
        assert float(lo) <= float(up)


def test_dnorm_sweep_rejects_rational_limit(tmp_path):
    rc = main(["dnorm-sweep", "--out", str(tmp_path),
               "--param", "theta_limit=0.0"])
    assert rc == 2


def test_dnorm_sweep_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    args = ["dnorm-sweep", "--param", "directions=8", "--param", "t_samples=5",
            "--param", "box_radius=8", "--param", "k_max=1"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "dnorm_sweep.csv").read_bytes() == (b / "dnorm_sweep.csv").read_bytes()


def test_laguerre_approx_output(tmp_path):
    rc = main(["laguerre-approx", "--out", str(tmp_path),
               "--param", "n_values=[4,8]"])
    assert rc == 0
    lines = (tmp_path / "laguerre_approx.csv").read_text().splitlines()
    assert "normalization=" in lines[0]
    assert lines[1] == "eth,N,l1_error"
    errs = [float(line.split(",")[2]) for line in lines[2:]]
    assert len(errs) == 2
    assert errs[1] < errs[0]


def test_bridge_length_output(tmp_path):
    rc = main(["bridge-length", "--out", str(tmp_path),
               "--param", "h_values=[0.1]", "--param", "anchor_n=1",
               "--param", "epsilon=0.6", "--param", "anchor_budget=24",
               "--param", "pivot_box_radius=12", "--param", "pivot_fejer_n=6",
               "--param", "box_radius=10", "--param", "sample_budget=16"])
    assert rc == 0
    lines = (tmp_path / "bridge_length.csv").read_text().splitlines()
    assert "basic_estimate=ESTIMATE" in lines[0]
    assert lines[1].split(",") == ["theta", "vartheta", "reach_modular",
                                   "imprint_a", "imprint_b", "basic_estimate",
                                   "total", "seed", "grid_fingerprint"]
    assert len(lines) == 3
    data = json.loads((tmp_path / "bridge_length.json").read_text())
    assert len(data) == 1
    assert data[0]["basic_estimate_is_estimate"] is True
    row = lines[2].split(",")
    assert float(row[6]) == pytest.approx(data[0]["total"], rel=1e-9)


def test_out_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("HEISENMOD_OUT", str(tmp_path))
    rc = main(["inner-product", "--param", "box_radius=6"])
    assert rc == 0
    assert (tmp_path / "inner_product.txt").exists()
