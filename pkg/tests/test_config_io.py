import numpy as np
import pytest

from tpbm.config import ConfigError, parse_config
from tpbm.dosimetry import Profile
from tpbm.fields import ScalarField
from tpbm.outputs import (
    OutputError,
    read_field_dump,
    write_cutline_csv,
    write_field_dump,
    write_probe_csv,
)

from importlib import resources


def shipped(name):
    return resources.files("tpbm") / "configs" / name


MINIMAL = """
phantom:
  spacing_mm: 1.0
  lateral_extent_mm: 10.0
  layers:
    - {material: tissue, thickness_mm: 10.0}
materials:
  tissue:
    optical: {mu_a_per_cm: 0.16, mu_s_per_cm: 0.76, g: 0.89, n: 1.4}
    thermal: {k_w_mc: 0.5, rho_kg_m3: 1200.0, cp_j_kgc: 4000.0}
sources:
  centers_mm: [[5.0, 5.0]]
  shape: {type: disc, radius_mm: 2.0}
  irradiance_mw_cm2: 100.0
  light_fraction: 0.35
  heat_fraction: 0.65
"""


def write_cfg(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_reference_config_matches_property_tables():
    cfg = parse_config(shipped("reference_head.yaml"))
    scalp = cfg.materials["scalp"]
    assert scalp.optical.mu_a == 0.16
    assert scalp.optical.mu_s == 0.76
    assert scalp.optical.g == 0.89
    assert scalp.optical.diffusion == 0.043
    assert scalp.thermal.k == 0.50
    assert scalp.thermal.w_b == 0.00143
    brain = cfg.materials["brain"]
    assert brain.optical.mu_a == 0.57
    assert brain.optical.diffusion == 0.039
    assert brain.thermal.q_met == 10437.0
    assert cfg.blood.rho_b == 1050.0 and cfg.blood.c_b == 3600.0
    assert len(cfg.sources) == 9
    assert cfg.sources[0].irradiance_total == 100.0
    assert cfg.thermal.h_mw_cm2c == 0.5
    assert cfg.phantom.spacing_mm == 0.5


def test_slab_config_parses():
    cfg = parse_config(shipped("slab_validation.yaml"))
    assert cfg.optics.solver == "both"
    assert len(cfg.sources) == 1


def test_minimal_config(tmp_path):
    cfg = parse_config(write_cfg(tmp_path, MINIMAL))
    ph = cfg.build_phantom()
    assert ph.dims == (10, 10, 10)
    assert cfg.optics.solver == "diffusion"  # defaults apply


def test_unknown_key_strict_vs_lenient(tmp_path):
    path = write_cfg(tmp_path, MINIMAL + "\nbogus_section: {a: 1}\n")
    with pytest.raises(ConfigError, match="bogus_section"):
        parse_config(path)
    cfg = parse_config(path, strict=False)
    assert any("bogus_section" in w for w in cfg.warnings)


def test_diagnostic_names_key_path(tmp_path):
    bad = MINIMAL.replace("radius_mm: 2.0", "radius_mm: -2.0")
    with pytest.raises(ConfigError, match=r"sources\.shape\.radius_mm"):
        parse_config(write_cfg(tmp_path, bad))


def test_fractions_must_sum_to_one(tmp_path):
    bad = MINIMAL.replace("light_fraction: 0.35", "light_fraction: 0.4").replace(
        "heat_fraction: 0.65", "heat_fraction: 0.7"
    )
    with pytest.raises(ConfigError, match="fraction"):
        parse_config(write_cfg(tmp_path, bad))


def test_empty_layers_rejected(tmp_path):
    bad = MINIMAL.replace(
        "  layers:\n    - {material: tissue, thickness_mm: 10.0}\n", "  layers: []\n"
    )
    with pytest.raises(ConfigError, match="layer"):
        parse_config(write_cfg(tmp_path, bad))


def test_missing_required_key(tmp_path):
    bad = MINIMAL.replace("  spacing_mm: 1.0\n", "")
    with pytest.raises(ConfigError, match="spacing_mm"):
        parse_config(write_cfg(tmp_path, bad))


def test_malformed_yaml(tmp_path):
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(write_cfg(tmp_path, "phantom: [unclosed"))


def test_cutline_csv_format(tmp_path):
    prof = Profile(np.array([0.0, 0.5]), np.array([1.25, 2.5]),
                   "temperature", "C")
    path = write_cutline_csv(prof, tmp_path / "line.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    assert lines[0] == "position_cm,temperature_C"
    assert lines[1] == "0.0,1.25"


def test_cutline_csv_byte_identical(tmp_path):
    rng = np.random.default_rng(0)
    prof = Profile(np.linspace(0, 1, 50), rng.random(50), "fluence_rate", "mW/cm^2")
    a = write_cutline_csv(prof, tmp_path / "a.csv")
    b = write_cutline_csv(prof, tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_probe_csv_columns(tmp_path):
    path = write_probe_csv([1.0, 2.0], {"scalp": [33.5, 34.0], "cortex": [37.0, 37.01]},
                           tmp_path / "probes.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "time_s,T_scalp_C,T_cortex_C"
    assert len(lines) == 3


def test_field_dump_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    values = rng.random((5, 4, 3)).astype(np.float32).astype(float)
    field = ScalarField(values, 0.1, "fluence_rate", "mW/cm^2")
    path, hdr = write_field_dump(field, tmp_path / "f.f32")
    assert path.stat().st_size == 4 * 5 * 4 * 3
    back = read_field_dump(path)
    assert back.values.shape == (5, 4, 3)
    assert np.array_equal(back.values.astype(np.float32),
                          values.astype(np.float32))
    assert back.spacing == pytest.approx(0.1)
    assert back.quantity == "fluence_rate"


def test_field_dump_zeros_checksum(tmp_path):
    import hashlib

    field = ScalarField(np.zeros((2, 2, 2)), 0.1, "fluence_rate", "mW/cm^2")
    path, hdr = write_field_dump(field, tmp_path / "z.f32")
    assert path.stat().st_size == 32
    expected = hashlib.sha256(b"\x00" * 32).hexdigest()
    assert f"sha256:{expected}" in hdr.read_text()


def test_field_dump_detects_corruption(tmp_path):
    field = ScalarField(np.ones((3, 3, 3)), 0.1, "t", "u")
    path, _ = write_field_dump(field, tmp_path / "c.f32")
    raw = bytearray(path.read_bytes())
    raw[0] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(OutputError, match="checksum"):
        read_field_dump(path)


def test_field_dump_rejects_nonfinite(tmp_path):
    field = ScalarField(np.full((2, 2, 2), np.nan), 0.1, "t", "u")
    with pytest.raises(OutputError):
        write_field_dump(field, tmp_path / "n.f32")


def test_field_dump_ordering_x_fastest(tmp_path):
    # payload index = x + nx*(y + ny*z)
    values = np.arange(24, dtype=float).reshape(2, 3, 4)
    field = ScalarField(values, 0.1, "t", "u")
    path, _ = write_field_dump(field, tmp_path / "o.f32")
    flat = np.frombuffer(path.read_bytes(), dtype="<f4")
    assert flat[0] == values[0, 0, 0]
    assert flat[1] == values[1, 0, 0]
    assert flat[2] == values[0, 1, 0]
