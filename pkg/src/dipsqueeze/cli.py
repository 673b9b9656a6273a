"""Command-line front end.

    dipsqueeze run CONFIG.yaml
    dipsqueeze compare A.csv B.csv [--tol 1e-8] [--col xi2=1e-6 ...]

A run writes ``<prefix>.csv`` and ``<prefix>.manifest`` (``key=value``
lines) into the output directory.  Exit codes: 0 success, 2 configuration
error, 3 numerical abort, 4 non-convergence; ``compare`` returns 1 when a
tolerance is exceeded.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .ed import DEFAULT_CAP, DimensionError, evolve_exact
from .lattice import LatticeSpec, build_couplings, inverse_moment_of_inertia
from .meanfield import DEFAULT_L, MeanFieldModel, phase_boundaries, phase_diagram
from .moments import CollectiveMoments, Series, squeezing_from_moments
from .oat import OatParams, oat_moments, oat_squeezing, optimal_time
from .spin import single_spin_evolution
from .spinwave import instability_threshold, mode_table, rsw_squeezing
from .sweeps import squeezing_at_fraction
from .tce import MonitorOptions, TceModel, converge_dt, default_dt, integrate, save_checkpoint

log = logging.getLogger("dipsqueeze")

EXIT_OK, EXIT_DIFF, EXIT_CONFIG, EXIT_ABORT, EXIT_NOCONV = 0, 1, 2, 3, 4

METHODS = ("oat", "rsw", "tce", "ed", "single-spin", "meanfield", "dispersion", "phase-diagram", "fig1d")

SECTIONS = {
    "method": None,
    "lattice": {"L", "Ly", "S", "boundary"},
    "couplings": {"J", "B_q"},
    "time": {"t_max", "units", "dt", "samples", "record_every"},
    "output": {"dir", "prefix"},
    "options": None,
}

OPTIONS = {
    "oat": {"inertia"},
    "rsw": {"convention", "inertia", "allow_unstable", "include_bosons"},
    "tce": {
        "layout",
        "stop_on_r_max",
        "stop_on_negative_variance",
        "r_decreasing_samples",
        "negative_variance_tol",
        "check_invariants",
        "checkpoint",
    },
    "ed": {"cap"},
    "single-spin": set(),
    "meanfield": {"T", "eta", "tol", "max_iter", "L_mf", "seed"},
    "dispersion": {"convention", "window"},
    "phase-diagram": {"B_q", "L_mf", "boundaries"},
    "fig1d": {"B_q", "L", "alpha", "tce"},
}

DEFAULTS = {
    "lattice": {"boundary": "periodic", "Ly": None},
    "couplings": {"J": 1.0, "B_q": 0.0},
    "time": {"units": "absolute", "dt": None, "samples": 201, "record_every": None},
    "output": {"dir": ".", "prefix": None},
}


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config
def load_config(path) -> dict:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return resolve_config(raw)


def resolve_config(raw) -> dict:
    """Validate keys strictly and fill defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    method = raw.get("method")
    if method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {method!r}")
    cfg = {"method": method}
    for sec, allowed in SECTIONS.items():
        if allowed is None:
            continue
        given = raw.get(sec) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"section {sec!r} must be a mapping")
        bad = set(given) - allowed
        if bad:
            raise ConfigError(f"unknown keys in {sec!r}: {sorted(bad)}")
        cfg[sec] = {**DEFAULTS.get(sec, {}), **given}
    opts = raw.get("options") or {}
    if not isinstance(opts, dict):
        raise ConfigError("section 'options' must be a mapping")
    bad = set(opts) - OPTIONS[method]
    if bad:
        raise ConfigError(f"unknown options for method {method!r}: {sorted(bad)}")
    cfg["options"] = dict(opts)
    if cfg["time"]["units"] not in ("absolute", "t_min"):
        raise ConfigError("time.units must be 'absolute' or 't_min'")
    if cfg["output"]["prefix"] is None:
        cfg["output"]["prefix"] = method
    return cfg


def make_spec(cfg) -> LatticeSpec:
    lat, cp = cfg["lattice"], cfg["couplings"]
    for key in ("L", "S"):
        if key not in lat:
            raise ConfigError(f"lattice.{key} is required for method {cfg['method']!r}")
    try:
        return LatticeSpec(
            L=int(lat["L"]),
            S=float(lat["S"]),
            J=float(cp["J"]),
            B_q=float(cp["B_q"]),
            boundary=lat["boundary"],
            Ly=None if lat.get("Ly") is None else int(lat["Ly"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def rotor_tmin_of(spec: LatticeSpec, inertia: str = "pairwise") -> tuple[float, float]:
    chi = inverse_moment_of_inertia(spec, build_couplings(spec, dense=False), inertia)
    return optimal_time(OatParams(spec.N * spec.S, chi)).t_min, chi


def time_grid(cfg, tmin: float | None) -> np.ndarray:
    tm = cfg["time"]
    if "t_max" not in tm:
        raise ConfigError("time.t_max is required")
    t_max = float(tm["t_max"])
    if tm["units"] == "t_min":
        if tmin is None or not np.isfinite(tmin):
            raise ConfigError("time.units = t_min needs a defined rotor t_min")
        t_max *= tmin
    return np.linspace(0.0, t_max, int(tm["samples"]))


# ------------------------------------------------------------------ output
def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    x = float(v)
    return "" if not math.isfinite(x) else repr(x)


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, columns: dict) -> None:
    keys = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    lines = [",".join(keys)]
    for i in range(n):
        lines.append(",".join(_fmt(columns[k][i]) for k in keys))
    write_atomic(path, "\n".join(lines) + "\n")


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = " ".join(_fmt(x) for x in v)
        else:
            out[key] = _fmt(v)
    return out


def write_manifest(path: Path, cfg: dict, extra: dict) -> None:
    entries = {"code_version": __version__, **_flatten(cfg, "config."), **_flatten(extra)}
    write_atomic(path, "".join(f"{k}={v}\n" for k, v in entries.items()))


def series_columns(s: Series, tmin: float | None = None) -> dict:
    cols = s.columns()
    if tmin is not None and np.isfinite(tmin) and tmin > 0:
        cols = {"t": cols["t"], "t_over_tmin": cols["t"] / tmin, **{k: v for k, v in cols.items() if k != "t"}}
    return cols


# ----------------------------------------------------------------- methods
def run_oat(cfg):
    spec = make_spec(cfg)
    tmin, chi = rotor_tmin_of(spec, cfg["options"].get("inertia", "pairwise"))
    t = time_grid(cfg, tmin)
    p = OatParams(spec.N * spec.S, chi)
    sq = oat_squeezing(p, t)
    mom = oat_moments(p, t)
    cols = {
        "t": t,
        "t_over_tmin": t / tmin,
        "mean_x": mom.mean_x,
        "var_min": sq.var_min,
        "var_max": sq.var_max,
        "angle": sq.angle,
        "xi2": sq.xi2,
    }
    return cols, {"t_min": tmin, "chi": chi, "Ktot": p.Ktot, "stop_reason": "end-of-grid"}, EXIT_OK


def run_rsw(cfg):
    spec = make_spec(cfg)
    o = cfg["options"]
    inertia = o.get("inertia", "pairwise")
    tmin, _ = rotor_tmin_of(spec, inertia)
    t = time_grid(cfg, tmin)
    try:
        r = rsw_squeezing(
            spec,
            t,
            convention=o.get("convention", "pairwise"),
            inertia=inertia,
            allow_unstable=bool(o.get("allow_unstable", False)),
            include_bosons=bool(o.get("include_bosons", True)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    vmin, vmax = r.rotor.eigvals()
    cols = {
        "t": r.t,
        "t_over_tmin": r.t / tmin,
        "mean_x": r.mean_x_eff,
        "var_min": vmin,
        "var_max": vmax,
        "xi2": r.xi2,
        "R": r.R,
        "N_bos": r.N_bos,
    }
    reason = "diluteness-breach" if r.truncated_at is not None else "end-of-grid"
    extra = {"t_min": tmin, "chi": r.chi, "stop_reason": reason, "unstable_modes": r.unstable}
    if r.truncated_at is not None:
        extra["stop_time"] = r.truncated_at
    return cols, extra, EXIT_OK


def run_tce(cfg, out_dir: Path):
    spec = make_spec(cfg)
    o = cfg["options"]
    tmin, _ = rotor_tmin_of(spec)
    t = time_grid(cfg, tmin)
    model = TceModel(spec, layout=o.get("layout"))
    dt = cfg["time"]["dt"]
    if dt == "auto":
        dt = converge_dt(model)
    elif dt is None:
        dt = default_dt(spec, model.table)
    dt = float(dt)
    t_end = float(t[-1])
    n = max(1, math.ceil(t_end / dt))
    dt = t_end / n
    rec = cfg["time"]["record_every"] or max(1, n // max(1, len(t) - 1))
    mon = MonitorOptions(
        stop_on_r_max=bool(o.get("stop_on_r_max", True)),
        stop_on_negative_variance=bool(o.get("stop_on_negative_variance", True)),
        r_decreasing_samples=int(o.get("r_decreasing_samples", 3)),
        negative_variance_tol=float(o.get("negative_variance_tol", 1e-9)),
        check_invariants=bool(o.get("check_invariants", True)),
    )
    rep = integrate(model, t_end, dt=dt, monitor=mon, record_every=int(rec))
    if o.get("checkpoint") and rep.final_state is not None:
        save_checkpoint(out_dir / o["checkpoint"], model, rep.final_state)
    extra = {
        "t_min": tmin,
        "dt": dt,
        "steps": rep.steps,
        "stop_reason": rep.stop_reason,
        "stop_time": rep.stop_time,
        "energy_drift": rep.energy_drift,
        "invariant_violation": rep.invariant_violation,
        "layout": model.layout,
    }
    if rep.message:
        extra["message"] = rep.message
    code = EXIT_ABORT if rep.stop_reason == "numerical-abort" else EXIT_OK
    return series_columns(rep.series, tmin), extra, code


def run_ed(cfg):
    spec = make_spec(cfg)
    tmin, _ = rotor_tmin_of(spec)
    t = time_grid(cfg, tmin)
    try:
        s = evolve_exact(spec, t, cap=int(cfg["options"].get("cap", DEFAULT_CAP)))
    except DimensionError as exc:
        raise ConfigError(str(exc)) from exc
    return series_columns(s, tmin), {"t_min": tmin, "stop_reason": "end-of-grid"}, EXIT_OK


def run_single_spin(cfg):
    lat, cp = cfg["lattice"], cfg["couplings"]
    if "S" not in lat:
        raise ConfigError("lattice.S is required")
    t = time_grid(cfg, None)
    r = single_spin_evolution(float(lat["S"]), float(cp["B_q"]), t)
    sq = squeezing_from_moments(CollectiveMoments(r.mean_x, r.cov), 1, float(lat["S"]))
    cols = {"t": t, "mean_x": r.mean_x, "var_min": sq.var_min, "var_max": sq.var_max, "angle": sq.angle, "xi2": r.xi2}
    return cols, {"stop_reason": "end-of-grid"}, EXIT_OK


def _grid(spec_value, name):
    if isinstance(spec_value, dict):
        try:
            return np.linspace(float(spec_value["start"]), float(spec_value["stop"]), int(spec_value["num"]))
        except KeyError as exc:
            raise ConfigError(f"{name} grid needs start, stop, num") from exc
    if isinstance(spec_value, (list, tuple)):
        return np.asarray(spec_value, dtype=float)
    return np.array([float(spec_value)])


def run_meanfield(cfg):
    lat, cp, o = cfg["lattice"], cfg["couplings"], cfg["options"]
    if "S" not in lat or "T" not in o:
        raise ConfigError("meanfield needs lattice.S and options.T")
    model = MeanFieldModel(float(lat["S"]), float(cp["B_q"]), J=float(cp["J"]), L=int(o.get("L_mf", DEFAULT_L)))
    kw = {k: o[k] for k in ("eta", "tol", "max_iter") if k in o}
    rows = {k: [] for k in ("T", "phase", "mA_x", "mA_y", "mA_z", "mB_x", "mB_y", "mB_z", "m_xy", "m_stag", "free_energy", "energy", "converged", "iterations")}
    all_conv = True
    for T in _grid(o["T"], "T"):
        st = model.solve(T, o["seed"], **kw) if "seed" in o else model.equilibrium(T, **kw)
        all_conv &= st.converged
        for k, v in zip(("mA_x", "mA_y", "mA_z"), st.mA):
            rows[k].append(v)
        for k, v in zip(("mB_x", "mB_y", "mB_z"), st.mB):
            rows[k].append(v)
        rows["T"].append(T)
        rows["phase"].append(st.phase)
        rows["m_xy"].append(st.m_xy)
        rows["m_stag"].append(st.m_stag)
        rows["free_energy"].append(st.free_energy)
        rows["energy"].append(st.energy)
        rows["converged"].append(st.converged)
        rows["iterations"].append(st.iterations)
    extra = {"D0": model.D0, "D_stag": model.D_stag, "stop_reason": "converged" if all_conv else "not-converged"}
    return rows, extra, EXIT_OK if all_conv else EXIT_NOCONV


def run_dispersion(cfg):
    spec = make_spec(cfg)
    o = cfg["options"]
    conv = o.get("convention", "pairwise")
    try:
        modes = mode_table(spec, convention=conv)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    window = tuple(o.get("window", (-10.0, 10.0)))
    th = instability_threshold(spec, window=window, convention=conv)
    cols = {"kx": modes.kx, "ky": modes.ky, "omega2": modes.omega2, "stable": modes.stable}
    extra = {
        "threshold_found": th.found,
        "B_qm": th.B_q,
        "first_unstable_kx": th.mode[0] if th.mode else None,
        "first_unstable_ky": th.mode[1] if th.mode else None,
        "stop_reason": "end-of-grid",
    }
    return cols, extra, EXIT_OK


def run_phase_diagram(cfg):
    lat, cp, o = cfg["lattice"], cfg["couplings"], cfg["options"]
    if "S" not in lat or "B_q" not in o:
        raise ConfigError("phase-diagram needs lattice.S and options.B_q")
    S, L = float(lat["S"]), int(o.get("L_mf", DEFAULT_L))
    rows = phase_diagram(S, _grid(o["B_q"], "B_q"), J=float(cp["J"]), L=L)
    cols = {
        "B_q": [r.B_q for r in rows],
        "T_c_xy": [r.T_c_xy for r in rows],
        "T_c_neel": [r.T_c_neel for r in rows],
        "T_css": [r.T_css for r in rows],
        "m_xy": [r.m_xy for r in rows],
        "m_stag": [r.m_stag for r in rows],
    }
    extra = {"stop_reason": "end-of-grid"}
    if o.get("boundaries", True):
        pb = phase_boundaries(S, J=float(cp["J"]), L=L)
        extra.update(B_qm=pb.B_qm, B_qc=pb.B_qc, B_qp=pb.B_qp)
    return cols, extra, EXIT_OK


def run_fig1d(cfg):
    lat, cp, o = cfg["lattice"], cfg["couplings"], cfg["options"]
    if "S" not in lat:
        raise ConfigError("fig1d needs lattice.S")
    Ls = [int(x) for x in (o.get("L") or [lat.get("L", 6)])]
    bqs = _grid(o.get("B_q", cp["B_q"]), "B_q")
    alpha = float(o.get("alpha", 0.3))
    cols = {k: [] for k in ("B_q", "L", "N", "t_min", "t", "xi2_rsw", "xi2_tce", "tce_stop_reason")}
    drift = 0.0
    for bq in bqs:
        for L in Ls:
            spec = LatticeSpec(L=L, S=float(lat["S"]), J=float(cp["J"]), B_q=float(bq), boundary=lat["boundary"])
            p = squeezing_at_fraction(spec, alpha, dt=cfg["time"]["dt"], run_tce=bool(o.get("tce", True)))
            drift = max(drift, p.energy_drift)
            for k, v in (("B_q", bq), ("L", L), ("N", p.N), ("t_min", p.t_min), ("t", p.t), ("xi2_rsw", p.xi2_rsw), ("xi2_tce", p.xi2_tce), ("tce_stop_reason", p.stop_reason)):
                cols[k].append(v)
    return cols, {"alpha": alpha, "energy_drift": drift, "stop_reason": "end-of-grid"}, EXIT_OK


def execute(cfg: dict) -> int:
    out_dir = Path(cfg["output"]["dir"])
    prefix = cfg["output"]["prefix"]
    m = cfg["method"]
    if m == "tce":
        cols, extra, code = run_tce(cfg, out_dir)
    else:
        runner = {
            "oat": run_oat,
            "rsw": run_rsw,
            "ed": run_ed,
            "single-spin": run_single_spin,
            "meanfield": run_meanfield,
            "dispersion": run_dispersion,
            "phase-diagram": run_phase_diagram,
            "fig1d": run_fig1d,
        }[m]
        cols, extra, code = runner(cfg)
    extra = {"time_units": "1/J", **extra, "exit_code": code}
    write_csv(out_dir / f"{prefix}.csv", cols)
    write_manifest(out_dir / f"{prefix}.manifest", cfg, extra)
    return code


# ----------------------------------------------------------------- compare
def read_csv(path) -> tuple[list[str], dict[str, list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path} is empty")
    header = rows[0]
    cols = {h: [r[i] for r in rows[1:]] for i, h in enumerate(header)}
    return header, cols


def _as_float(x: str) -> float:
    return math.inf if x == "" else float(x)


def compare_files(a, b, tol: float | None = None, col_tol: dict | None = None) -> dict[str, float]:
    """Per-column max absolute deviation over rows shared by both files.

    Columns must match; non-numeric columns count as deviation 0 when equal
    and ``inf`` otherwise.  Empty fields (undefined values) only match empty.
    """
    ha, ca = read_csv(a)
    hb, cb = read_csv(b)
    if ha != hb:
        raise ValueError(f"schemas differ: {ha} vs {hb}")
    n = min(len(ca[ha[0]]), len(cb[hb[0]])) if ha else 0
    out = {}
    for h in ha:
        worst = 0.0
        for x, y in zip(ca[h][:n], cb[h][:n]):
            try:
                fx, fy = _as_float(x), _as_float(y)
            except ValueError:
                d = 0.0 if x == y else math.inf
            else:
                d = 0.0 if (math.isinf(fx) and math.isinf(fy)) else abs(fx - fy)
            worst = max(worst, d)
        out[h] = worst
    return out


# -------------------------------------------------------------------- main
def _parse_col_tol(items):
    out = {}
    for it in items or []:
        name, _, val = it.partition("=")
        if not val:
            raise ConfigError(f"--col expects NAME=TOL, got {it!r}")
        out[name] = float(val)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="dipsqueeze", description="Spin-squeezing dynamics of dipolar lattices")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run a configuration file")
    r.add_argument("config")
    c = sub.add_parser("compare", help="per-column deviation between two CSV outputs")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--tol", type=float, default=None, help="tolerance for every numeric column")
    c.add_argument("--col", action="append", help="per-column tolerance NAME=TOL")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.cmd == "run":
            return execute(load_config(args.config))
        col_tol = _parse_col_tol(args.col)
        dev = compare_files(args.a, args.b)
        failed = False
        for name, d in dev.items():
            lim = col_tol.get(name, args.tol)
            flag = ""
            if lim is not None and d > lim:
                flag, failed = "  FAIL", True
            print(f"{name}\t{d:.3e}{flag}")
        return EXIT_DIFF if failed else EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
