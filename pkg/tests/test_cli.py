import numpy as np
import pytest
import yaml

from dipsqueeze.cli import ConfigError, compare_files, main, read_csv, resolve_config


def write_cfg(tmp_path, cfg, name="cfg.yaml"):
    cfg.setdefault("output", {})
    cfg["output"].setdefault("dir", str(tmp_path))
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return p


def manifest(path):
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        resolve_config({"method": "oat", "lattice": {"L": 4, "S": 1, "spin": 2}})
    with pytest.raises(ConfigError):
        resolve_config({"method": "oat", "extra": 1})
    with pytest.raises(ConfigError):
        resolve_config({"method": "nope"})
    with pytest.raises(ConfigError):
        resolve_config({"method": "oat", "options": {"layout": "full"}})


def test_config_error_exit_code(tmp_path):
    p = write_cfg(tmp_path, {"method": "oat", "lattice": {"L": 4, "S": 1, "spin": 2}})
    assert main(["run", str(p)]) == 2
    p = write_cfg(tmp_path, {"method": "tce", "lattice": {"L": 0, "S": 1}, "time": {"t_max": 1}})
    assert main(["run", str(p)]) == 2
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2


def test_ed_cap_is_config_error(tmp_path):
    p = write_cfg(tmp_path, {"method": "ed", "lattice": {"L": 4, "S": 1, "boundary": "open"}, "time": {"t_max": 1}})
    assert main(["run", str(p)]) == 2


def test_oat_run_writes_csv_and_manifest(tmp_path):
    cfg = {
        "method": "oat",
        "lattice": {"L": 6, "S": 3},
        "couplings": {"B_q": 2.0},
        "time": {"t_max": 1.0, "units": "t_min", "samples": 11},
        "output": {"prefix": "o"},
    }
    assert main(["run", str(write_cfg(tmp_path, cfg))]) == 0
    header, cols = read_csv(tmp_path / "o.csv")
    assert header[:2] == ["t", "t_over_tmin"] and "xi2" in header
    assert len(cols["t"]) == 11
    assert float(cols["t_over_tmin"][-1]) == pytest.approx(1.0)
    m = manifest(tmp_path / "o.manifest")
    assert m["config.method"] == "oat" and m["exit_code"] == "0"
    assert m["config.lattice.L"] == "6" and "code_version" in m and "t_min" in m


def test_tce_and_ed_agree_through_compare(tmp_path, capsys):
    base = {
        "lattice": {"L": 2, "Ly": 1, "S": 1, "boundary": "open"},
        "couplings": {"B_q": 2.0},
        "time": {"t_max": 0.5, "samples": 11, "dt": 0.0005},
    }
    tce = {**base, "method": "tce", "output": {"prefix": "a"}, "options": {"stop_on_r_max": False}}
    ed = {**base, "method": "ed", "output": {"prefix": "b"}}
    assert main(["run", str(write_cfg(tmp_path, tce, "a.yaml"))]) == 0
    assert main(["run", str(write_cfg(tmp_path, ed, "b.yaml"))]) == 0
    dev = compare_files(tmp_path / "a.csv", tmp_path / "b.csv")
    for col in ("t", "mean_x", "var_min", "var_max", "energy", "J2"):
        assert dev[col] < 1e-9
    m = manifest(tmp_path / "a.manifest")
    assert float(m["energy_drift"]) < 1e-12 and m["stop_reason"] == "end-of-grid"
    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"), "--col", "mean_x=1e-9"]) == 0
    assert main(["compare", str(tmp_path / "a.csv"), str(tmp_path / "b.csv"), "--tol", "1e-30"]) == 1
    assert "mean_x" in capsys.readouterr().out


def test_compare_schema_mismatch(tmp_path):
    (tmp_path / "x.csv").write_text("t,a\n0,1\n")
    (tmp_path / "y.csv").write_text("t,b\n0,1\n")
    assert main(["compare", str(tmp_path / "x.csv"), str(tmp_path / "y.csv")]) == 2


def test_undefined_values_are_empty_fields(tmp_path):
    cfg = {
        "method": "single-spin",
        "lattice": {"S": 0.5},
        "couplings": {"B_q": 1.0},
        "time": {"t_max": 1.0, "samples": 3},
        "output": {"prefix": "s"},
    }
    assert main(["run", str(write_cfg(tmp_path, cfg))]) == 0
    _, cols = read_csv(tmp_path / "s.csv")
    assert all(float(x) == pytest.approx(1.0) for x in cols["xi2"])
    (tmp_path / "u.csv").write_text("t,xi2\n0,\n1,2.0\n")
    assert compare_files(tmp_path / "u.csv", tmp_path / "u.csv")["xi2"] == 0.0


def test_dispersion_run(tmp_path):
    cfg = {
        "method": "dispersion",
        "lattice": {"L": 8, "S": 3},
        "time": {"t_max": 0},
        "output": {"prefix": "d"},
    }
    assert main(["run", str(write_cfg(tmp_path, cfg))]) == 0
    m = manifest(tmp_path / "d.manifest")
    assert m["threshold_found"] == "1"
    assert float(m["first_unstable_kx"]) == pytest.approx(np.pi)
    _, cols = read_csv(tmp_path / "d.csv")
    assert len(cols["kx"]) == 63


def test_meanfield_nonconvergence_exit_code(tmp_path):
    cfg = {
        "method": "meanfield",
        "lattice": {"S": 3},
        "couplings": {"B_q": 10.0},
        "time": {"t_max": 0},
        "options": {"T": 5.0, "seed": "xy", "max_iter": 2, "L_mf": 8},
        "output": {"prefix": "mf"},
    }
    assert main(["run", str(write_cfg(tmp_path, cfg))]) == 4
    cfg["options"]["max_iter"] = 100000
    assert main(["run", str(write_cfg(tmp_path, cfg))]) == 0
    assert manifest(tmp_path / "mf.manifest")["stop_reason"] == "converged"


def test_numerical_abort_exit_code(tmp_path):
    cfg = {
        "method": "tce",
        "lattice": {"L": 3, "S": 1},
        "couplings": {"B_q": 1.0},
        "time": {"t_max": 50.0, "samples": 11, "dt": 5.0},
        "options": {"stop_on_r_max": False, "stop_on_negative_variance": False},
        "output": {"prefix": "boom"},
    }
    with np.errstate(all="ignore"):
        assert main(["run", str(write_cfg(tmp_path, cfg))]) == 3
    assert manifest(tmp_path / "boom.manifest")["stop_reason"] == "numerical-abort"


def test_tce_checkpoint_written(tmp_path):
    cfg = {
        "method": "tce",
        "lattice": {"L": 3, "S": 1},
        "couplings": {"B_q": 1.0},
        "time": {"t_max": 0.05, "samples": 6, "dt": 0.005},
        "options": {"checkpoint": "ck.npz"},
        "output": {"prefix": "c"},
    }
    assert main(["run", str(write_cfg(tmp_path, cfg))]) == 0
    assert (tmp_path / "ck.npz").exists()
    assert not list(tmp_path.glob("*.tmp"))
