import math

import pytest

from tpbm.materials import (
    DEFAULT_BLOOD,
    DEFAULT_MATERIALS,
    BloodProps,
    MaterialError,
    TissueOpticalProps,
    TissueThermalProps,
    diffusion_coefficient,
    effective_attenuation,
    light_speed_in_medium,
    reduced_scattering,
)


def test_reduced_scattering():
    assert reduced_scattering(0.76, 0.89) == pytest.approx(0.0836)
    assert reduced_scattering(10.0, 0.0) == 10.0


def test_diffusion_coefficient():
    # 1 / (3 (mu_a + mu_s'))
    assert diffusion_coefficient(0.16, 0.0836) == pytest.approx(1.0 / (3 * 0.2436))


def test_effective_attenuation_scalp():
    mu_eff = effective_attenuation(0.16, 0.043)
    assert mu_eff == pytest.approx(math.sqrt(0.16 / 0.043))
    assert mu_eff == pytest.approx(1.929, abs=2e-3)


def test_light_speed():
    assert light_speed_in_medium(1.0) == pytest.approx(2.99792458e10)
    assert light_speed_in_medium(1.4) == pytest.approx(2.99792458e10 / 1.4)


def test_d_override_takes_precedence():
    opt = TissueOpticalProps(mu_a=0.16, mu_s=0.76, g=0.89, n=1.4, d_override=0.043)
    assert opt.diffusion == 0.043
    no_override = TissueOpticalProps(mu_a=0.16, mu_s=0.76, g=0.89, n=1.4)
    assert no_override.diffusion == pytest.approx(diffusion_coefficient(0.16, 0.0836))


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mu_a": -0.1, "mu_s": 1.0, "g": 0.5, "n": 1.4},
        {"mu_a": 0.1, "mu_s": -1.0, "g": 0.5, "n": 1.4},
        {"mu_a": 0.1, "mu_s": 1.0, "g": 1.0, "n": 1.4},
        {"mu_a": 0.1, "mu_s": 1.0, "g": -0.2, "n": 1.4},
        {"mu_a": 0.1, "mu_s": 1.0, "g": 0.5, "n": 0.9},
        {"mu_a": 0.1, "mu_s": 1.0, "g": 0.5, "n": 1.4, "d_override": 0.0},
    ],
)
def test_optical_validation(kwargs):
    with pytest.raises(MaterialError):
        TissueOpticalProps(**kwargs)


def test_thermal_validation():
    with pytest.raises(MaterialError):
        TissueThermalProps(k=0.0, rho=1000.0, cp=4000.0)
    with pytest.raises(MaterialError):
        TissueThermalProps(k=0.5, rho=1000.0, cp=4000.0, w_b=-1e-3)


def test_blood_defaults():
    assert DEFAULT_BLOOD.rho_b == 1050.0
    assert DEFAULT_BLOOD.c_b == 3600.0
    assert DEFAULT_BLOOD.T_b == 37.0
    assert DEFAULT_BLOOD.perfusion_coupling == pytest.approx(3.78e6)
    with pytest.raises(MaterialError):
        BloodProps(T_b=50.0)


def test_default_table_values():
    scalp = DEFAULT_MATERIALS["scalp"]
    assert scalp.optical.mu_a == 0.16
    assert scalp.optical.diffusion == 0.043
    assert scalp.thermal.k == 0.50
    assert scalp.thermal.w_b == 0.00143
    brain = DEFAULT_MATERIALS["brain"]
    assert brain.optical.mu_a == 0.57
    assert brain.optical.diffusion == 0.039
    assert brain.thermal.w_b == 0.08
    assert brain.thermal.q_met == 10437.0
    skull = DEFAULT_MATERIALS["skull"]
    assert skull.thermal.rho == 1990.0
    # the LED package neither absorbs nor scatters
    led = DEFAULT_MATERIALS["led"]
    assert led.optical.mu_a == 0.0 and led.optical.mu_s == 0.0
