"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import matrix_functions  # noqa: E402
from energy_spaces.cli import SUBCOMMANDS, main  # noqa: E402
from energy_spaces.decomposition import (  # noqa: E402
    direct_bracket_power,
    identity_suite,
    nonpositive_power_decompose,
)
from energy_spaces.energy import energy, taylor_energy_extrapolate  # noqa: E402
from energy_spaces.jets import exponential, fd_oracle, polynomial  # noqa: E402
from energy_spaces.operators import OperatorSpec, bracket  # noqa: E402
from energy_spaces.scanner import ScanConfig, generalized_level_comparison, scan_energy_spaces  # noqa: E402
from energy_spaces.waves import (  # noqa: E402
    ComplexWaveSlice,
    WaveParams,
    closed_form_derivative,
    closed_form_psi_derivative,
    dispersion_residual,
    scenario,
)

RESULTS = []


def record(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


@lru_cache(maxsize=None)
def scans():
    t0 = time.perf_counter()
    s1 = scan_energy_spaces(ScanConfig(wave=scenario(1), axis="time", epsilon=1e-10))
    s2 = scan_energy_spaces(ScanConfig(wave=scenario(2), axis="space", epsilon=1e-10))
    return s1, s2, time.perf_counter() - t0


def test_c01_identity_suite():
    t0 = time.perf_counter()
    rows = identity_suite(matrix_functions(), n_range=range(2, 7), v_range=range(1, 5), reciprocal_ns=())
    dt = time.perf_counter() - t0
    worst = max(r["error"] for r in rows)
    ok = all(r["passed"] for r in rows) and worst <= 1e-12 and dt < 5.0
    record("1 identity suite", ok, f"{len(rows)} checks, worst relative error {worst:.2e} (<= 1e-12), {dt:.2f} s (< 5 s)")


def test_c02_jets_vs_finite_differences():
    worst, bad = 0.0, []
    for f, t in matrix_functions():
        jet = f.jet(t, 6)
        for k in range(7):
            d = jet.derivative_value(k)
            est, err = fd_oracle(f, t, k)
            diff = abs(d - est)
            allowed = max(1e-6 * abs(d), err)
            if not diff <= allowed:
                bad.append((f.label, k, diff))
            worst = max(worst, diff / allowed if allowed > 0 else (0.0 if diff == 0 else math.inf))
    record("2 jets vs finite differences", not bad, f"k <= 6 on {len(matrix_functions())} functions, worst gap {worst:.2f} of the allowed bound, failures {bad}")


def test_c03_closed_forms():
    worst = 0.0
    for preset in (1, 2):
        p = scenario(preset)
        r, t = 70.0, 37.0
        for axis in ("time", "space"):
            slc = ComplexWaveSlice(p, axis, r if axis == "time" else t)
            free = t if axis == "time" else r
            for n in range(2, 6):
                for i in range(5):
                    jet = slc.jets(free, i, n)[0].derivative_value(i)
                    closed = closed_form_derivative(p, i, n, axis, (r, t))
                    worst = max(worst, abs(closed - jet) / abs(jet))
    reports = [closed_form_psi_derivative(scenario(k), i, ax, (70.0, 37.0)) for k in (1, 2) for ax in ("time", "space") for i in (1, 2, 3)]
    generated = all(math.isfinite(rep.abs_discrepancy) for rep in reports)
    sample = reports[0]
    record(
        "3 closed forms",
        worst <= 1e-10 and generated,
        f"worst relative error {worst:.2e} (<= 1e-10); {len(reports)} discrepancy reports, "
        f"e.g. i=1 time axis literal {sample.literal:.3g} vs jet {sample.jet_value:.3g}",
    )


def test_c04_dispersion():
    spreads = []
    for preset in (1, 2):
        p = scenario(preset)
        vals = np.array([dispersion_residual(p, i, n, (70.0, 37.0)).residual for i in range(5) for n in range(2, 6)])
        spreads.append(float(np.max(np.abs(vals - vals[0])) / abs(vals[0])))
    w = 3000.0
    plane = WaveParams(A=1.0, k1=w / 299792458.0, k2=0.0, omega=w, T=1.0, r1=0.0, r2=1.0)
    plane_res = max(abs(dispersion_residual(plane, i, n, (0.5, 0.25)).residual) for i in range(5) for n in range(2, 6))
    plane_rel = plane_res / plane.k1 ** 2
    ok = max(spreads) <= 1e-12 and plane_rel <= 1e-12
    record("4 dispersion invariance", ok, f"spread {max(spreads):.2e} (<= 1e-12), plane-wave residual {plane_res:.2e} ({plane_rel:.2e} of k1^2)")


def test_c05a_geometric_decay():
    s1, s2, _ = scans()
    r1 = s1.decay_ratios(0)[1:5] / (2 * scenario(1).omega) ** 2 - 1
    r2 = s2.decay_ratios(0)[1:5] / (2 * abs(scenario(2).kappa)) ** 2 - 1
    worst = float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))
    record("5a geometric decay", worst <= 0.05, f"measured ratios within {worst:.2e} of (2w)^2 and (2|k2-jk1|)^2 (<= 5%)")


def test_c05b_cutoffs():
    s1, s2, _ = scans()
    i1, i2 = s1.cutoffs[0], s2.cutoffs[0]
    record("5b cutoffs", i1 in (2, 3, 4) and i2 in (2, 3, 4), f"i1 = {i1}, i2 = {i2} (each in {{2, 3, 4}})")


def _level_ratio(rep, i):
    return generalized_level_comparison(rep, 0, 1).ratios[i]


def test_c05c_ratio_scenario_1():
    s1, _, _ = scans()
    r = _level_ratio(s1, 1)
    ok = r is not None and 1e-5 <= r <= 1e-3
    record("5c level ratio scenario 1", ok, f"E_1/E_0 at i=1 = {r:.3e} (target 1e-4 within a decade)")


def test_c05c_ratio_scenario_2():
    _, s2, _ = scans()
    r = _level_ratio(s2, 1)
    ok = r is not None and 1e-12 <= r <= 1e-10
    record("5c level ratio scenario 2", ok, f"E_1/E_0 at i=1 = {r:.3e} (target 1e-11 within a decade)")


def test_c05c_level_one_empty_scenario_1():
    s1, _, _ = scans()
    record("5c level-1 cutoff scenario 1", s1.cutoffs[1] == 0, f"cutoff {s1.cutoffs[1]}, E_1 at i=0 = {s1.m[(1, 0)]:.3e} vs epsilon 1e-10 (target cutoff 0)")


def test_c05c_level_one_empty_scenario_2():
    _, s2, _ = scans()
    record("5c level-1 cutoff scenario 2", s2.cutoffs[1] == 0, f"cutoff {s2.cutoffs[1]}, E_1 at i=0 = {s2.m[(1, 0)]:.3e} vs epsilon 1e-10 (target cutoff 0)")


def test_c05_runtime():
    _, _, dt = scans()
    record("5 scan runtime", dt < 30.0, f"{dt:.2f} s for both scenarios (< 30 s)")


def test_c06_minkowski():
    s1, s2, _ = scans()
    extra = scan_energy_spaces(ScanConfig(fn=exponential(-0.2), interval=(0.0, 10.0), i_max=6, p_max=1))
    margins = [m for rep in (s1, s2, extra) for m in rep.minkowski]
    worst = min(m.margin + m.tolerance for m in margins)
    ok = bool(margins) and all(m.holds for m in margins)
    record("6 Minkowski margins", ok, f"{len(margins)} margins, smallest margin {min(m.margin for m in margins):.3e} (>= 0 up to quadrature tolerance, slack {worst:.3e})")


def test_c07_energy_extrapolation():
    s = ComplexWaveSlice(scenario(1), "time", 2.0).smooth_fn(real=True, check_domain=False)
    dt_max = 0.1 / (2 * scenario(1).omega)
    worst = 0.0
    for dt in (0.1, 0.5, 1.0, dt_max):
        ext = taylor_energy_extrapolate(s, 0.0, 100.0, dt, terms=10)
        ref = energy(s, 0.0, 100.0 + dt, tol=1e-13, rel_tol=1e-14).value
        worst = max(worst, abs(ext - ref) / ref)
    cubic = polynomial([0.5, -1.0, 0.25, 0.125], label="cubic")
    poly_gap = 0.0
    for dt in (0.1, 0.7):
        ext = taylor_energy_extrapolate(cubic, 0.0, 1.0, dt, terms=7)
        ref = energy(cubic, 0.0, 1.0 + dt, tol=1e-13, rel_tol=1e-14)
        poly_gap = max(poly_gap, abs(ext - ref.value) - 2e-12)
    ok = worst <= 1e-8 and poly_gap <= 0
    record("7 energy extrapolation", ok, f"evanescent worst relative error {worst:.2e} (<= 1e-8); polynomial series exact to quadrature tolerance")


def test_c08_structural_zeros():
    bad = []
    for f, t in matrix_functions() + [(exponential(0.5), 0.3)]:
        for p in range(4):
            if np.any(bracket(OperatorSpec("-", 1, p), f, t, 4).coeffs):
                bad.append((f.label, p))
    record("8 structural zeros", not bad, f"Psi_1^- and [[f]^p]_1^- for p <= 3 coefficient-exact zero; failures {bad}")


def test_c09_reciprocal_routes():
    worst = 0.0
    count = 0
    for f, t in matrix_functions() + [(exponential(0.5), 0.3)]:
        for level in (0, 1):
            for n in (-3, -2, -1, 1):
                for v in range(5):
                    direct = direct_bracket_power(f, n, v, t, level)
                    routed = nonpositive_power_decompose(f, n, v, t, level)
                    worst = max(worst, abs(routed - direct) / abs(direct))
                    count += 1
    record("9 reciprocal-power routes", worst <= 1e-12, f"{count} checks, worst relative error {worst:.2e} (<= 1e-12)")


def test_c10_determinism(tmp_path):
    mismatched = []
    for sub in SUBCOMMANDS:
        for preset in ("1", "2"):
            outs = []
            for _ in range(2):
                d = tmp_path / f"{sub}-{preset}"
                code = main([sub, "--scenario", preset, "-o", str(d)])
                outs.append((code, {p.name: p.read_bytes() for p in sorted(d.iterdir())}))
            if outs[0] != outs[1] or outs[0][0] != 0:
                mismatched.append((sub, preset))
    record("10 determinism", not mismatched, f"{len(SUBCOMMANDS)} subcommands x 2 scenarios byte-identical; mismatches {mismatched}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
