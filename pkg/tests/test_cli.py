import csv
import io
import json

import pytest

from coherent_constraints.cli import OUTPUT_DIR_ENV, ConfigError, main, parse_config
from coherent_constraints.report import CSV_HEADER, Check, RunReport, render, upper_check
from coherent_constraints.suites import PLANNED

FAST_UNITY = ["unity", "--nmax", "4", "--points", "16"]


def test_parse_defaults():
    cfg = parse_config(["example1"])
    assert cfg.nmax == 40 and cfg.scheme == "total_quanta" and cfg.grid == 5
    assert cfg.checks == PLANNED["example1"](cfg)
    assert parse_config(["trotter"]).slices == (10, 20, 40, 80, 160)
    assert parse_config(["example2"]).nmax == 12


@pytest.mark.parametrize("argv, field, value", [
    (["trotter", "--T", "2", "--slices", "5,10"], "slices", (5, 10)),
    (["projector-suite", "--cutoffs", "2,4"], "cutoffs", (2, 4)),
    (["unity", "--L", "4.5"], "half_width", 4.5),
    (["gauge", "--gauge-slices", "12", "--seed", "3"], "gauge_slices", 12),
    (["example2", "--format", "csv"], "format", "csv"),
])
def test_parse_flags(argv, field, value):
    assert getattr(parse_config(argv), field) == value


def test_example1_forces_total_quanta():
    with pytest.warns(UserWarning):
        cfg = parse_config(["example1", "--scheme", "per_mode"])
    assert cfg.scheme == "total_quanta"


@pytest.mark.parametrize("argv", [["unity", "--points", "0"], ["trotter", "--T", "-1"],
                                  ["trotter", "--slices", "10,-2"]])
def test_invalid_values(argv):
    with pytest.raises(ConfigError):
        parse_config(argv)


def test_config_file_with_flag_override(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"nmax": 6, "points": 20, "seed": 9}))
    cfg = parse_config(["unity", "--config", str(path), "--points", "24"])
    assert (cfg.nmax, cfg.points, cfg.seed) == (6, 24, 9)
    path.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ConfigError):
        parse_config(["unity", "--config", str(path)])
    assert main(["unity", "--config", str(tmp_path / "missing.json")]) == 2


def test_usage_errors_exit_2(tmp_path):
    assert main([]) == 2
    assert main(["no-such-command"]) == 2
    assert main(FAST_UNITY + ["--output", str(tmp_path / "absent" / "out.json")]) == 2


def test_csv_output(tmp_path):
    out = tmp_path / "unity.csv"
    assert main(FAST_UNITY + ["--format", "csv", "--output", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert tuple(rows[0]) == CSV_HEADER == ("name", "value", "tolerance", "pass")
    assert rows[1][0] == "unity_resolution_residual" and rows[1][3] == "true"


def test_json_output_and_determinism(tmp_path):
    a = tmp_path / "a.json"
    assert main(FAST_UNITY + ["--output", str(a)]) == 0
    first = a.read_bytes()
    assert main(FAST_UNITY + ["--output", str(a)]) == 0
    assert a.read_bytes() == first
    data = json.loads(a.read_text())
    assert set(data) == {"version", "config", "checks", "timings"}
    assert data["timings"] == {}
    assert [c["name"] for c in data["checks"]] == ["unity_resolution_residual"]


def test_timings_flag(tmp_path):
    out = tmp_path / "t.json"
    main(FAST_UNITY + ["--timings", "--output", str(out)])
    assert "unity" in json.loads(out.read_text())["timings"]


def test_stdout_and_env_output_dir(tmp_path, monkeypatch, capsys):
    assert main(FAST_UNITY) == 0
    assert json.loads(capsys.readouterr().out)["checks"][0]["pass"] is True
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert main(FAST_UNITY + ["--format", "csv"]) == 0
    assert (tmp_path / "unity.csv").read_text().startswith("name,value,tolerance,pass\n")


def test_failing_check_exits_1(tmp_path):
    # three slices cannot reduce the error eightfold
    out = tmp_path / "trotter.json"
    code = main(["trotter", "--nmax", "4", "--slices", "1,2,3", "--output", str(out)])
    checks = {c["name"]: c for c in json.loads(out.read_text())["checks"]}
    assert code == (0 if all(c["pass"] for c in checks.values()) else 1)
    assert set(checks) == {"trotter_error_N1", "trotter_error_N2", "trotter_error_N3",
                           "trotter_loglog_slope", "trotter_error_reduction"}
    assert not checks["trotter_error_reduction"]["pass"] and code == 1


@pytest.mark.parametrize("argv", [
    ["projector-suite", "--cutoffs", "2,4"],
    ["gauge", "--nmax", "3", "--gauge-slices", "10", "--schedules", "3"],
])
def test_small_suites_pass(argv, capsys):
    assert main(argv) == 0
    names = [c["name"] for c in json.loads(capsys.readouterr().out)["checks"]]
    assert sorted(names) == sorted(PLANNED[argv[0]](parse_config(argv)))


def test_empty_report_is_valid():
    report = RunReport({"subcommand": "none"}, version="0")
    assert json.loads(render(report, "json"))["checks"] == []
    assert render(report, "csv") == "name,value,tolerance,pass\n"
    assert report.passed


def test_non_finite_values_serialize():
    report = RunReport({}, [Check("x", float("nan"), 1.0, False), upper_check("y", 0.5, 1.0)])
    data = json.loads(render(report, "json"))
    assert data["checks"][0]["value"] == "nan" and data["checks"][1]["pass"] is True
    with pytest.raises(ValueError):
        render(report, "xml")
