import json
import os

import pytest

from sphereline import cli


def run(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_catalog_listing(capsys):
    code, out, _ = run(["catalog"], capsys)
    assert code == 0
    lines = [l for l in out.strip().splitlines() if l]
    assert len(lines) == 6
    cliff = next(l for l in lines if l.startswith("clifford_torus"))
    assert "chi=0" in cliff and "minimal" in cliff


def test_catalog_machine_output(capsys):
    code, out, _ = run(["catalog", "--machine"], capsys)
    assert code == 0
    entries = json.loads(out)
    assert len(entries) == 6
    names = {e["name"] for e in entries}
    assert "veronese" in names and "cylinder_patch" in names


def test_unknown_subcommand_exits_nonzero(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2


def test_unknown_surface_exit_code(capsys):
    code, _, err = run(["check", "--surface", "nonexistent"], capsys)
    assert code == cli.EXIT_BAD_SURFACE
    assert "unknown surface" in err


def test_bad_resolution_exit_code(capsys):
    code, _, _ = run(["check", "--surface", "clifford_torus", "--grid", "4x4"], capsys)
    assert code == cli.EXIT_BAD_RESOLUTION
    code, _, _ = run(["check", "--surface", "clifford_torus", "--grid", "8192x8"], capsys)
    assert code == cli.EXIT_BAD_RESOLUTION


def test_bad_output_exit_code(capsys, tmp_path):
    code, _, _ = run(
        ["check", "--surface", "clifford_torus", "--grid", "16x16",
         "--out", str(tmp_path / "missing" / "report.json")],
        capsys,
    )
    assert code == cli.EXIT_BAD_OUTPUT


def test_bad_variation_step_exit_code(capsys):
    code, _, _ = run(
        ["variation", "--surface", "clifford_torus", "--grid", "16x16", "--delta", "1"],
        capsys,
    )
    assert code == cli.EXIT_BAD_RESOLUTION


def test_lemma34_rejects_small_p(capsys):
    code, _, _ = run(["lemma34", "--trials", "10", "--p", "1"], capsys)
    assert code == cli.EXIT_BAD_SURFACE


def test_lemma34_small_sweep(tmp_path, capsys):
    out = tmp_path / "lemma.json"
    code, _, _ = run(
        ["lemma34", "--trials", "500", "--p", "4", "--m", "3", "--seed", "42",
         "--out", str(out)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out.read_text())
    names = {c["name"] for c in rep["checks"]}
    assert names == {"lemma34_sweep", "lemma34_extremal"}
    extremal = next(c for c in rep["checks"] if c["name"] == "lemma34_extremal")
    assert extremal["lhs"] == 24.0 and extremal["rhs"] == 24.0


def test_check_slice_sphere_passes(tmp_path, capsys):
    out = tmp_path / "slice.json"
    code, _, _ = run(
        ["check", "--surface", "slice_sphere", "--n", "2", "--grid", "24x48",
         "--out", str(out)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["pass"] is True
    main = next(c for c in rep["checks"] if c["name"] == "main_inequality")
    assert "equality=True" in main["notes"]


def test_check_clifford_reports_discrepancy(tmp_path, capsys):
    out = tmp_path / "cliff.json"
    code, _, _ = run(
        ["check", "--surface", "clifford_torus", "--grid", "32x32", "--out", str(out)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["pass"] is True
    main = next(c for c in rep["checks"] if c["name"] == "main_inequality")
    assert main["pass"] is True
    assert "equality=False" in main["notes"]
    assert "strict" in main["notes"]


def test_check_cylinder_skips_integral_checks(tmp_path, capsys):
    out = tmp_path / "cyl.json"
    code, _, _ = run(
        ["check", "--surface", "cylinder_patch", "--r", "1.0", "--grid", "16x8",
         "--out", str(out)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out.read_text())
    by_name = {c["name"]: c for c in rep["checks"]}
    for name in ("gauss_bonnet", "lemma1", "main_inequality", "equality_case_audit"):
        assert by_name[name]["notes"] == "skipped: non-compact"
        assert by_name[name]["pass"] is True
    # local identity checks did run
    assert by_name["codazzi"]["pass"] is True
    assert by_name["dt_structure"]["pass"] is True


def test_variation_subcommand(tmp_path, capsys):
    out = tmp_path / "var.json"
    code, _, _ = run(
        ["variation", "--surface", "graph_torus", "--eps", "0.3", "--grid", "32x32",
         "--seed", "7", "--out", str(out)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out.read_text())
    check = rep["checks"][0]
    assert check["name"] == "first_variation"
    assert check["lhs"] <= 1e-4


def test_csv_format(tmp_path, capsys):
    out = tmp_path / "report.csv"
    code, _, _ = run(
        ["check", "--surface", "clifford_torus", "--grid", "16x16",
         "--format", "csv", "--out", str(out)],
        capsys,
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "name,kind,lhs,rhs,residual,tolerance,pass"
    assert all(len(l.split(",")) == 7 for l in lines[1:])


def test_tolerance_override_can_fail_run(tmp_path, capsys):
    out = tmp_path / "strict.json"
    code, _, _ = run(
        ["check", "--surface", "graph_torus", "--eps", "0.3", "--grid", "16x16",
         "--tol", "simons=1e-30", "--out", str(out)],
        capsys,
    )
    assert code == cli.EXIT_FAIL
    rep = json.loads(out.read_text())
    assert rep["pass"] is False


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("surface=clifford_torus\ngrid=16x16\nseed=99\n")
    out = tmp_path / "out.json"
    code, _, _ = run(
        ["check", "--surface", "clifford_torus", "--config", str(cfg),
         "--out", str(out)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["grid"] == [16, 16]
    assert rep["config"]["seed"] == 99


def test_reports_byte_identical_with_pinned_epoch(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    args = ["check", "--surface", "clifford_torus", "--grid", "16x16", "--seed", "5"]
    assert run(args + ["--out", str(a)], capsys)[0] == 0
    assert run(args + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()
