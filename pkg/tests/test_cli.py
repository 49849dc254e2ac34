import numpy as np
import pytest
from click.testing import CliRunner

from tpbm.cli import main
from tpbm.fields import ScalarField
from tpbm.outputs import write_field_dump

TINY = """
phantom:
  spacing_mm: 1.0
  lateral_extent_mm: 16.0
  layers:
    - {material: scalp, thickness_mm: 3.0}
    - {material: brain, thickness_mm: 13.0}
materials:
  scalp:
    optical: {mu_a_per_cm: 0.16, mu_s_per_cm: 0.76, g: 0.89, n: 1.4, d_cm: 0.043}
    thermal: {k_w_mc: 0.50, rho_kg_m3: 1200.0, cp_j_kgc: 4000.0, w_b_per_s: 0.00143, q_met_w_m3: 363.0}
  brain:
    optical: {mu_a_per_cm: 0.57, mu_s_per_cm: 0.80, g: 0.89, n: 1.4, d_cm: 0.039}
    thermal: {k_w_mc: 0.57, rho_kg_m3: 1050.0, cp_j_kgc: 3650.0, w_b_per_s: 0.08, q_met_w_m3: 10437.0}
sources:
  centers_mm: [[8.0, 8.0]]
  shape: {type: rect, half_width_mm: 1.0}
  irradiance_mw_cm2: 100.0
  light_fraction: 0.35
  heat_fraction: 0.65
output:
  directory: out
  cutlines:
    - name: t_line
      quantity: temperature
      start_mm: [8.0, 8.0, 0.0]
      end_mm: [8.0, 8.0, 16.0]
      samples: 33
  dump_fields: [fluence, temperature]
"""


@pytest.fixture
def runner():
    return CliRunner()


def test_explain_units(runner):
    result = runner.invoke(main, ["--explain-units"])
    assert result.exit_code == 0
    assert "mW/cm^2" in result.output
    assert "x 10" in result.output


def test_run_command_writes_artifacts(runner, tmp_path):
    cfg = tmp_path / "tiny.yaml"
    cfg.write_text(TINY)
    out = tmp_path / "out"
    result = runner.invoke(main, ["run", str(cfg), "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / "report.txt").exists()
    assert (out / "report.kv").exists()
    assert (out / "t_line.csv").exists()
    assert (out / "fluence.f32").exists()
    assert (out / "fluence.f32.hdr").exists()
    assert (out / "temperature.f32").exists()
    # first cutline sample is at the surface and physiological
    first = (out / "t_line.csv").read_text().splitlines()[1].split(",")
    assert float(first[0]) == 0.0
    assert 30.0 < float(first[1]) < 45.0


def test_run_bad_config_exit_2(runner, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(TINY.replace("heat_fraction: 0.65", "heat_fraction: 0.7"))
    result = runner.invoke(main, ["run", str(cfg)])
    assert result.exit_code == 2
    assert "config error" in result.output


def test_run_unknown_key_lenient(runner, tmp_path):
    cfg = tmp_path / "warn.yaml"
    cfg.write_text(TINY + "\nmystery: 1\n")
    strict = runner.invoke(main, ["run", str(cfg), "--out", str(tmp_path / "o1")])
    assert strict.exit_code == 2
    lenient = runner.invoke(
        main, ["run", str(cfg), "--lenient", "--out", str(tmp_path / "o2")]
    )
    assert lenient.exit_code == 0
    assert "mystery" in lenient.output


def test_validate_exit_codes(runner):
    ok = runner.invoke(main, ["validate"])
    assert ok.exit_code == 0, ok.output
    assert "overall: PASS" in ok.output
    bad = runner.invoke(main, ["validate", "--fault", "mu_a_sign"])
    assert bad.exit_code == 1
    assert "FAIL" in bad.output


def test_validate_report_deterministic(runner):
    a = runner.invoke(main, ["validate"])
    b = runner.invoke(main, ["validate"])
    assert a.output == b.output


def test_cutline_command(runner, tmp_path):
    z = (np.arange(10) + 0.5) * 0.1
    vals = np.broadcast_to(np.exp(-2.0 * z)[None, None, :], (10, 10, 10)).copy()
    field = ScalarField(vals, 0.1, "fluence_rate", "mW/cm^2")
    dump = tmp_path / "f.f32"
    write_field_dump(field, dump)
    out_csv = tmp_path / "line.csv"
    result = runner.invoke(main, [
        "cutline", str(dump), "--from", "5,5,0", "--to", "5,5,10",
        "-n", "11", "-o", str(out_csv),
    ])
    assert result.exit_code == 0, result.output
    lines = out_csv.read_text().splitlines()
    assert len(lines) == 12
    assert lines[0].startswith("position_cm,")


def test_cutline_bad_point_exit_2(runner, tmp_path):
    field = ScalarField(np.ones((4, 4, 4)), 0.1, "t", "u")
    dump = tmp_path / "g.f32"
    write_field_dump(field, dump)
    result = runner.invoke(main, ["cutline", str(dump), "--from", "1,2", "--to", "1,2,3"])
    assert result.exit_code == 2


def test_report_command(runner, tmp_path):
    cfg = tmp_path / "tiny.yaml"
    cfg.write_text(TINY)
    out = tmp_path / "run1"
    assert runner.invoke(main, ["run", str(cfg), "--out", str(out)]).exit_code == 0
    result = runner.invoke(main, ["report", str(out)])
    assert result.exit_code == 0
    assert "peak_scalp_temp_c" in result.output
    missing = runner.invoke(main, ["report", str(tmp_path)])
    assert missing.exit_code == 2


def test_sweep_command(runner, tmp_path):
    cfg = tmp_path / "tiny.yaml"
    cfg.write_text(TINY)
    out = tmp_path / "sweep_out"
    result = runner.invoke(main, [
        "sweep", str(cfg), "--param", "source-irradiance",
        "--values", "50,100", "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    text = (out / "sweep_report.txt").read_text()
    assert "value = 50.0" in text and "value = 100.0" in text


def test_sweep_partial_exit_3(runner, tmp_path):
    cfg = tmp_path / "tiny.yaml"
    cfg.write_text(TINY)
    result = runner.invoke(main, [
        "sweep", str(cfg), "--param", "wavelength-property-set",
        "--values", "/missing/pset.yaml", "--out", str(tmp_path / "s2"),
    ])
    assert result.exit_code == 3
    assert "FAILED" in result.output
