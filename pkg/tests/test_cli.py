import csv
import json
import subprocess
import sys

import pytest

from energy_spaces.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    OUTPUT_ENV,
    SCAN_HEADER,
    SUBCOMMANDS,
    ConfigError,
    emit_report,
    main,
    parse_config,
    resolve_config,
)
from energy_spaces.jets import zero
from energy_spaces.scanner import ScanConfig, scan_energy_spaces


def test_scenario_one_preset():
    cfg = parse_config(["scan", "--scenario", "1"], env={})
    assert (cfg.k1, cfg.k2, cfg.A, cfg.omega, cfg.T, cfg.r1, cfg.r2) == (1e-10, 1e-10, 1.0, 0.03, 100.0, 2.0, 140.0)
    assert cfg.axis == "time" and cfg.fixed == 2.0


def test_override_field_by_field():
    cfg = parse_config(["scan", "--scenario", "2", "--omega", "100"], env={})
    assert cfg.omega == 100.0
    assert cfg.k1 == 0.001 and cfg.k2 == 1e-5
    assert cfg.axis == "space"


def test_unknown_preset(capsys):
    with pytest.raises(ConfigError, match="unknown preset"):
        parse_config(["scan", "--scenario", "7"], env={})
    assert main(["scan", "--scenario", "7"]) == EXIT_CONFIG
    assert "unknown preset" in capsys.readouterr().err


@pytest.mark.parametrize(
    "values, key",
    [
        (dict(bogus=1), "bogus"),
        (dict(i_max="six"), "i_max"),
        (dict(omega="fast"), "omega"),
        (dict(r1=500.0), "r1"),
        (dict(A=0.0), "A"),
        (dict(T=-1.0), "T"),
        (dict(axis="diagonal"), "axis"),
        (dict(fixed=1e6), "fixed"),
        (dict(n_values=[1]), "n_values"),
        (dict(epsilon=0.0), "epsilon"),
        (dict(i_max=20, p_max=1), "i_max"),
    ],
)
def test_errors_name_the_key(values, key):
    with pytest.raises(ConfigError) as info:
        resolve_config(values, env={})
    assert info.value.key == key
    assert str(info.value).startswith(key)


def test_echo_round_trip(tmp_path):
    cfg = parse_config(["dispersion", "--scenario", "2", "--omega", "100", "--n", "3", "--n", "4"], env={})
    path = tmp_path / "echo.json"
    path.write_text(json.dumps(cfg.echo()))
    again = parse_config(["dispersion", "--config", str(path)], env={})
    assert again == cfg


def test_config_file_then_flags(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"scenario": 2, "omega": 50.0, "i_max": 3}))
    cfg = parse_config(["scan", "--config", str(path), "--i-max", "4"], env={})
    assert cfg.omega == 50.0 and cfg.i_max == 4


def test_bad_config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        parse_config(["scan", "--config", str(path)], env={})


def test_output_dir_from_environment(tmp_path):
    cfg = parse_config(["scan"], env={OUTPUT_ENV: str(tmp_path)})
    assert cfg.output_dir == str(tmp_path)
    assert parse_config(["scan", "-o", "x"], env={OUTPUT_ENV: str(tmp_path)}).output_dir == "x"


def test_scan_csv_layout(tmp_path):
    assert main(["scan", "--scenario", "1", "-o", str(tmp_path)]) == EXIT_OK
    with open(tmp_path / "scan.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SCAN_HEADER
    assert len(rows) == 1 + 2 * 7
    meta = json.loads((tmp_path / "scan.json").read_text())
    assert meta["cutoffs"] == {"0": 4, "1": 3}
    assert meta["config"]["omega"] == 0.03
    assert "version" in meta and meta["minkowski"]


def test_empty_report(tmp_path):
    rep = scan_energy_spaces(ScanConfig(fn=zero(), interval=(0.0, 1.0), i_max=3, p_max=1))
    emit_report(rep, "csv", tmp_path)
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == ",".join(SCAN_HEADER)
    assert all(line.split(",")[3] == "0" for line in lines[1:])


@pytest.mark.parametrize("sub", SUBCOMMANDS)
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_byte_identical_reruns(tmp_path, sub, fmt):
    args = [sub, "--scenario", "2", "-o", str(tmp_path), "--format", fmt, "--i-max", "4"]
    assert main(args) == EXIT_OK
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert main(args) == EXIT_OK
    second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert first == second and first


def test_duplicate_verdicts(tmp_path):
    main(["duplicate", "--scenario", "1", "-o", str(tmp_path / "a")])
    main(["duplicate", "--scenario", "1", "--omega", "3000", "-o", str(tmp_path / "b")])
    a = json.loads((tmp_path / "a" / "duplicate.json").read_text())
    b = json.loads((tmp_path / "b" / "duplicate.json").read_text())
    assert a["verdict"] == "FirstOrderSufficient"
    assert b["verdict"] == "DuplicationRequired"


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "energy_spaces", "membership", "--scenario", "1", "-o", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "membership.csv").exists()


def test_malformed_flag_exit_code():
    assert main(["scan", "--i-max", "many"]) == 2
