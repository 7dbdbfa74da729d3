"""Command-line front end.

Subcommands::

    scan             energy-space scan (CSV of energies + JSON sidecar)
    dispersion       normalized dispersion residual over an (i, n) grid
    duplicate        cavity duplication classifier at (r0, T)
    decompose-check  decomposition identity suites
    membership       s^- kernel scan and Schwartz decay check

Settings come from a flat JSON object (``--config``) and/or flags; flags win.
Exit status: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .decomposition import identity_suite
from .energy import QuadratureError, duplication_classify
from .jets import JetError, exponential, polynomial, cosine
from .operators import kernel_scan, schwartz_decay_check
from .scanner import ScanConfig, ScanReport, generalized_level_comparison, scan_energy_spaces
from .waves import SCENARIOS, ComplexWaveSlice, WaveParams, closed_form_psi_derivative, dispersion_residual

SUBCOMMANDS = ("scan", "dispersion", "duplicate", "decompose-check", "membership")
OUTPUT_ENV = "ENERGY_SPACES_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

WAVE_KEYS = ("A", "k1", "k2", "omega", "c", "T", "r1", "r2")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one run (wave parameters always explicit)."""

    subcommand: str
    scenario: Optional[int]
    A: float
    k1: float
    k2: float
    omega: float
    c: float
    T: float
    r1: float
    r2: float
    axis: str
    fixed: float
    i_max: int = 6
    p_max: int = 1
    n_values: tuple = (2,)
    epsilon: float = 1e-10
    quad_tol: float = 1e-10
    energy_mode: str = "modulus"
    convention: str = "power-then-real"
    dt: float = 0.01
    dup_epsilon: float = 1e-3
    terms: int = 12
    k_max: int = 3
    grid_points: int = 41
    tol: float = 1e-12
    output_dir: str = "results"
    format: str = "csv"

    @property
    def wave(self) -> WaveParams:
        return WaveParams(**{k: getattr(self, k) for k in WAVE_KEYS})

    def echo(self) -> dict:
        d = asdict(self)
        d["n_values"] = list(self.n_values)
        return d


# key -> (type, default); None defaults are resolved from the scenario
_SCHEMA = {
    "subcommand": (str, "scan"),
    "scenario": (int, None),
    "A": (float, None),
    "k1": (float, None),
    "k2": (float, None),
    "omega": (float, None),
    "c": (float, None),
    "T": (float, None),
    "r1": (float, None),
    "r2": (float, None),
    "axis": (str, None),
    "fixed": (float, None),
    "i_max": (int, 6),
    "p_max": (int, 1),
    "n_values": (list, [2]),
    "epsilon": (float, 1e-10),
    "quad_tol": (float, 1e-10),
    "energy_mode": (str, "modulus"),
    "convention": (str, "power-then-real"),
    "dt": (float, 0.01),
    "dup_epsilon": (float, 1e-3),
    "terms": (int, 12),
    "k_max": (int, 3),
    "grid_points": (int, 41),
    "tol": (float, 1e-12),
    "output_dir": (str, None),
    "format": (str, "csv"),
}

_CHOICES = {
    "subcommand": SUBCOMMANDS,
    "axis": ("time", "space"),
    "energy_mode": ("modulus", "real"),
    "convention": ("power-then-real", "real-then-power"),
    "format": ("csv", "json"),
}


def _coerce(key: str, value):
    typ = _SCHEMA[key][0]
    if value is None:
        return None
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        if key in _CHOICES and value not in _CHOICES[key]:
            raise ConfigError(key, f"expected one of {list(_CHOICES[key])}, got {value!r}")
        return value
    if typ is list:
        if isinstance(value, (int,)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(key, f"expected a list of integers, got {value!r}")
        return list(value)
    raise AssertionError(typ)


def resolve_config(values: Dict[str, object], env: Optional[Dict[str, str]] = None) -> RunConfig:
    """Validate a flat mapping and resolve every default."""
    env = os.environ if env is None else env
    unknown = sorted(set(values) - set(_SCHEMA))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    vals = {k: _coerce(k, v) for k, v in values.items() if v is not None}

    explicit_wave = all(k in vals for k in ("k1", "k2", "omega", "T", "r1", "r2"))
    preset = vals.get("scenario")
    if preset is None and not explicit_wave:
        preset = 1
    if preset is not None:
        if preset not in SCENARIOS:
            raise ConfigError("scenario", f"unknown preset {preset!r} (known: {sorted(SCENARIOS)})")
        base = asdict(SCENARIOS[preset])
    else:
        base = asdict(WaveParams(k1=vals["k1"], k2=vals["k2"], omega=vals["omega"], T=vals["T"], r1=vals["r1"], r2=vals["r2"]))
    for k in WAVE_KEYS:
        if k in vals:
            base[k] = vals[k]
    try:
        wave = WaveParams(**base)
    except ValueError as exc:
        key = next((k for k in WAVE_KEYS if k in str(exc).split()[0:3] or str(exc).startswith(k)), "wave")
        raise ConfigError(key, str(exc)) from None

    axis = vals.get("axis") or ("space" if preset == 2 else "time")
    fixed = vals.get("fixed")
    if fixed is None:
        fixed = wave.r1 if axis == "time" else 0.0
    lo, hi = (wave.r1, wave.r2) if axis == "time" else (0.0, wave.T)
    if not lo <= fixed <= hi:
        raise ConfigError("fixed", f"{fixed!r} outside [{lo!r}, {hi!r}]")

    out = {k: default for k, (_, default) in _SCHEMA.items() if default is not None}
    out.update(vals)
    out.update(base)
    out["scenario"] = preset
    out["axis"] = axis
    out["fixed"] = float(fixed)
    out["n_values"] = tuple(out["n_values"])
    out["output_dir"] = vals.get("output_dir") or env.get(OUTPUT_ENV) or "results"

    for key, bad in (
        ("i_max", out["i_max"] < 0),
        ("p_max", out["p_max"] < 0),
        ("n_values", not out["n_values"] or min(out["n_values"]) < 2),
        ("epsilon", not out["epsilon"] > 0),
        ("quad_tol", not out["quad_tol"] > 0),
        ("dup_epsilon", not 0 < out["dup_epsilon"] < 1),
        ("terms", not 2 <= out["terms"] <= 24),
        ("k_max", out["k_max"] < 0),
        ("grid_points", out["grid_points"] < 1),
        ("tol", not out["tol"] > 0),
    ):
        if bad:
            raise ConfigError(key, f"invalid value {out[key]!r}")
    if out["i_max"] * (out["p_max"] + 1) + 2 > 24:
        raise ConfigError("i_max", "i_max*(p_max+1)+2 exceeds the jet order budget 24")
    return RunConfig(**out)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="energy-spaces", description="Energy-operator scans of PDE solutions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON settings file")
        p.add_argument("--scenario", type=int)
        for k in WAVE_KEYS:
            flag = "--omega" if k == "omega" else f"--{k}"
            p.add_argument(flag, dest=k, type=float)
        p.add_argument("--axis", choices=_CHOICES["axis"])
        p.add_argument("--fixed", type=float, help="r0 for the time axis, t0 for the space axis")
        p.add_argument("--i-max", dest="i_max", type=int)
        p.add_argument("--p-max", dest="p_max", type=int)
        p.add_argument("--n", dest="n_values", type=int, action="append", help="power n (repeatable)")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--quad-tol", dest="quad_tol", type=float)
        p.add_argument("--energy-mode", dest="energy_mode", choices=_CHOICES["energy_mode"])
        p.add_argument("--convention", choices=_CHOICES["convention"])
        p.add_argument("--dt", type=float)
        p.add_argument("--dup-epsilon", dest="dup_epsilon", type=float)
        p.add_argument("--terms", type=int)
        p.add_argument("--k-max", dest="k_max", type=int)
        p.add_argument("--grid-points", dest="grid_points", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--output-dir", "-o", dest="output_dir")
        p.add_argument("--format", choices=_CHOICES["format"])
    return parser


def parse_config(argv: Optional[Sequence[str]] = None, env: Optional[Dict[str, str]] = None) -> RunConfig:
    """Parse flags (and an optional ``--config`` JSON file) into a :class:`RunConfig`."""
    args = vars(_parser().parse_args(argv))
    values: Dict[str, object] = {}
    path = args.pop("config")
    if path:
        try:
            with open(path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config", "expected a flat JSON object")
        loaded = {k: v for k, v in loaded.items()}
        values.update(loaded)
    values.update({k: v for k, v in args.items() if v is not None})
    values["subcommand"] = args["subcommand"]
    return resolve_config(values, env)


# --------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": _json_safe(obj.real), "im": _json_safe(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_outputs(name: str, header, rows, meta: dict, fmt: str, outdir) -> List[Path]:
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        if fmt == "csv":
            data = outdir / f"{name}.csv"
            side = outdir / f"{name}.json"
            data.write_text(_csv_text(header, rows))
            side.write_text(_dumps(meta))
            return [data, side]
        doc = dict(meta)
        doc["rows"] = [dict(zip(header, r)) for r in rows]
        path = outdir / f"{name}.json"
        path.write_text(_dumps(doc))
        return [path]
    except OSError as exc:
        raise OSError(f"cannot write outputs to {outdir}: {exc}") from exc


SCAN_HEADER = ("p", "i", "axis", "energy", "m_i", "below_epsilon")


def report_rows(report: ScanReport) -> List[tuple]:
    """One row per (p, i): energy at the first configured n, sup over n, emptiness."""
    n0 = report.config["n_values"][0]
    axis = report.config["axis"]
    rows = []
    for p in report.levels():
        for i in report.orders(p):
            rows.append((p, i, axis, report.cell(p, i, n0).energy, report.m[(p, i)], report.below_epsilon[(p, i)]))
    return rows


def report_meta(report: ScanReport, run_config: Optional[dict] = None) -> dict:
    meta = {
        "tool": "energy-spaces",
        "version": __version__,
        "scan": report.config,
        "cutoffs": {str(p): c for p, c in report.cutoffs.items()},
        "cutoff_found": {str(p): v for p, v in report.cutoff_found.items()},
        "M": {str(p): v for p, v in report.M.items()},
        "minkowski": [
            {"p": m.p, "K": m.K, "n": m.n, "lhs": m.lhs, "rhs": m.rhs, "margin": m.margin, "holds": m.holds}
            for m in report.minkowski
        ],
        "failures": [
            {"p": c.p, "i": c.i, "n": c.n, "error": c.failure} for c in report.cells if c.failure
        ],
        "notes": list(report.notes)
        + [
            "energy series: E(q+dt) = E(q) + sum_{k>=1} d^(k-1)(f^2)(q) dt^k/k!; a k=0 term would count E(q) twice",
            "scenario 2 level-ratio target taken as 1e-11",
        ],
    }
    if 0 in report.M and 1 in report.M:
        lc = generalized_level_comparison(report, 0, 1)
        meta["level_comparison"] = {
            "ratios": {str(i): r for i, r in lc.ratios.items()},
            "upper_cutoff": lc.upper_cutoff,
            "upper_empty": lc.upper_empty,
            "notes": lc.notes,
        }
    if run_config is not None:
        meta["config"] = run_config
    return meta


def emit_report(report: ScanReport, fmt: str, path, run_config: Optional[dict] = None, name: str = "scan") -> List[Path]:
    """Write the scan table (CSV or JSON) and its JSON sidecar under ``path``."""
    return write_outputs(name, SCAN_HEADER, report_rows(report), report_meta(report, run_config), fmt, path)


# --------------------------------------------------------------------------
# subcommands


def _scan_config(cfg: RunConfig) -> ScanConfig:
    return ScanConfig(
        wave=cfg.wave,
        axis=cfg.axis,
        fixed=cfg.fixed,
        i_max=cfg.i_max,
        p_max=cfg.p_max,
        n_values=cfg.n_values,
        epsilon=cfg.epsilon,
        quad_tol=cfg.quad_tol,
        energy_mode=cfg.energy_mode,
        convention=cfg.convention,
    )


def run_scan(cfg: RunConfig) -> int:
    report = scan_energy_spaces(_scan_config(cfg))
    emit_report(report, cfg.format, cfg.output_dir, cfg.echo())
    return EXIT_NUMERIC if report.failed else EXIT_OK


def _point(cfg: RunConfig):
    # (r, t) for the slice origin
    return (cfg.fixed, 0.0) if cfg.axis == "time" else (cfg.wave.r1, cfg.fixed)


def run_dispersion(cfg: RunConfig) -> int:
    pt = _point(cfg)
    results = [dispersion_residual(cfg.wave, i, n, pt) for i in range(0, 5) for n in range(2, 6)]
    ref = results[0].residual
    scale = abs(ref) if ref != 0 else 1.0
    rows = []
    spread = 0.0
    for res in results:
        dev = abs(res.residual - ref) / scale
        spread = max(spread, dev)
        rows.append((res.i, res.n, res.residual.real, res.residual.imag, dev))
    meta = {
        "tool": "energy-spaces",
        "version": __version__,
        "config": cfg.echo(),
        "point": {"r": pt[0], "t": pt[1]},
        "real_expression": results[0].real_expression,
        "max_relative_spread": spread,
        "psi_derivative_discrepancy": [
            {
                "i": d.i,
                "axis": d.axis,
                "literal": [d.literal.real, d.literal.imag],
                "jet": [d.jet_value.real, d.jet_value.imag],
                "abs_discrepancy": d.abs_discrepancy,
                "rel_discrepancy": d.rel_discrepancy,
            }
            for d in (closed_form_psi_derivative(cfg.wave, i, cfg.axis, pt) for i in range(1, 4))
        ],
        "notes": [
            "d'Alembertian uses omega^2/c^2",
            "shortcut form 2 i rate g^2 of d^i Psi_1^+ compared with the jet value (2 rate)^(i+1) g^2; the jet value is the reference",
        ],
    }
    write_outputs("dispersion", ("i", "n", "residual_re", "residual_im", "relative_spread"), rows, meta, cfg.format, cfg.output_dir)
    return EXIT_OK


def run_duplicate(cfg: RunConfig) -> int:
    slc = ComplexWaveSlice(cfg.wave, "time", cfg.fixed if cfg.axis == "time" else cfg.wave.r1)
    f = slc.smooth_fn(real=cfg.energy_mode == "real")
    res = duplication_classify(f, slc.fixed, cfg.wave.T, cfg.dt, cfg.dup_epsilon, cfg.terms)
    rows = [(k, v, v > cfg.dup_epsilon * res.first_order) for k, v in enumerate(res.bracket_terms, start=1)]
    meta = {"tool": "energy-spaces", "version": __version__, "config": cfg.echo(), "r0": slc.fixed, **res.as_dict(),
            "notes": ["energy series starts at k=1 (E(T+dt) = E(T) + sum_k>=1 ...); a k=0 term would count E(T) twice"]}
    write_outputs("duplicate", ("k", "bracket_term", "breach"), rows, meta, cfg.format, cfg.output_dir)
    return EXIT_OK


def _suite_functions(cfg: RunConfig):
    slc = ComplexWaveSlice(cfg.wave, "time", cfg.fixed if cfg.axis == "time" else cfg.wave.r1)
    t_mid = 0.37 * cfg.wave.T
    return [
        (polynomial([0.5, -1.0, 0.25, 1.0], "poly"), 0.7),
        (exponential(0.4, 1.3), 0.3),
        (cosine(1.1, 0.8, 0.2), 0.3),
        (slc.smooth_fn(real=True), t_mid),
    ]


def run_decompose_check(cfg: RunConfig) -> int:
    rows = identity_suite(_suite_functions(cfg), tol=cfg.tol)
    header = ("check", "function", "n", "v", "error", "tol", "passed")
    table = [tuple(r[h] for h in header) for r in rows]
    failed = sum(not r["passed"] for r in rows)
    meta = {"tool": "energy-spaces", "version": __version__, "config": cfg.echo(), "checks": len(rows), "failed": failed}
    write_outputs("decompose_check", header, table, meta, cfg.format, cfg.output_dir)
    return EXIT_NUMERIC if failed else EXIT_OK


def run_membership(cfg: RunConfig) -> int:
    slc = ComplexWaveSlice(cfg.wave, cfg.axis, cfg.fixed)
    f = slc.smooth_fn(real=True)
    lo, hi = cfg.wave.interval(cfg.axis)
    grid = np.linspace(lo, hi, cfg.grid_points)
    rep = kernel_scan(f, range(0, cfg.k_max + 1), grid, cfg.epsilon, cfg.axis)
    span = hi - lo
    neg_grid = np.linspace(-span, 0.0, cfg.grid_points)
    free = slc.smooth_fn(real=True, check_domain=False)
    ok, worst = schwartz_decay_check(free, neg_grid, axis=cfg.axis)
    rep.schwartz_decay_ok = ok
    rows = [(s, k, v, (s, k) in rep.vanishing) for (s, k), v in sorted(rep.sups.items())]
    meta = {
        "tool": "energy-spaces",
        "version": __version__,
        "config": cfg.echo(),
        **rep.as_dict(),
        "schwartz_worst": {"k": worst[0], "j": worst[1], "point": worst[2], "value": worst[3]},
    }
    write_outputs("membership", ("sign", "k", "sup", "vanishing"), rows, meta, cfg.format, cfg.output_dir)
    return EXIT_OK


_RUNNERS = {
    "scan": run_scan,
    "dispersion": run_dispersion,
    "duplicate": run_duplicate,
    "decompose-check": run_decompose_check,
    "membership": run_membership,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        # argparse: --help/--version exit 0, malformed flags exit 2
        return int(exc.code or 0)
    try:
        return _RUNNERS[cfg.subcommand](cfg)
    except (QuadratureError, JetError, FloatingPointError, ZeroDivisionError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
