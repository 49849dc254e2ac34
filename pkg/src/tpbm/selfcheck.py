"""Built-in validation suite: fast analytic checks of every solver stage.

Each check compares a computed quantity against a closed-form value and
reports measured vs expected with its tolerance.  All checks run from
fixed seeds, so the report text is identical across invocations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bioheat import (
    InitialTemps,
    ThermalBoundarySpec,
    assemble_heat_sources,
    solve_pennes_steady,
    solve_pennes_transient,
)
from .diffusion import OpticalBoundarySpec, solve_fluence_cw
from .materials import (
    DEFAULT_BLOOD,
    Material,
    TissueOpticalProps,
    TissueThermalProps,
    effective_attenuation,
)
from .mc import McConfig, backend_name, run_mc
from .mc.samplers import fresnel_reflectance, photon_stream_state, next_uniform, sample_hg_cosine
from .phantom import build_layered_phantom

_SEED = 20240810


@dataclass
class CheckResult:
    name: str
    measured: float
    expected: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"[{mark}] {self.name:<34} measured={self.measured:.6g} "
                f"expected={self.expected:.6g} tol={self.tolerance:.3g}")


def _check(name, measured, expected, tolerance, relative=True):
    err = abs(measured - expected)
    if relative and expected != 0:
        err /= abs(expected)
    return CheckResult(name, float(measured), float(expected), tolerance, err <= tolerance)


def _uniform_phantom(name, optical, thermal, extent_mm=40.0, spacing_mm=1.0):
    mats = {name: Material(name, optical, thermal)}
    return build_layered_phantom([(name, extent_mm)], extent_mm, spacing_mm, mats)


_DUMMY_THERMAL = TissueThermalProps(k=0.5, rho=1000.0, cp=4000.0)


def check_diffusion_green() -> CheckResult:
    """Point source in a wide absorber vs the infinite-medium kernel."""
    opt = TissueOpticalProps(mu_a=0.16, mu_s=0.76, g=0.89, n=1.0, d_override=0.043)
    # wide enough that the farthest probe sits >1 cm from the boundary
    ph = _uniform_phantom("tissue", opt, _DUMMY_THERMAL, extent_mm=60.0)
    h = ph.spacing
    center = tuple((d // 2 + 0.5) * h for d in ph.dims)
    field = solve_fluence_cw(
        ph, OpticalBoundarySpec(), point_sources=[(center, 1.0)]
    )
    mu_eff = effective_attenuation(opt.mu_a, opt.diffusion)
    worst = 0.0
    for r in (0.5, 1.0, 1.5):
        got = field.sample((center[0] + r, center[1], center[2]))
        ref = math.exp(-mu_eff * r) / (4.0 * math.pi * opt.diffusion * r)
        worst = max(worst, abs(got - ref) / ref)
    return _check("diffusion Green function", worst, 0.0, 0.05, relative=False)


def check_beer_lambert(n_photons=100_000, fault=None) -> CheckResult:
    """Pure absorber slab: transmitted fraction vs exp(-mu_a L)."""
    mu_a = 1.0
    opt = TissueOpticalProps(mu_a=mu_a, mu_s=0.0, g=0.0, n=1.0)
    ph = _uniform_phantom("absorber", opt, _DUMMY_THERMAL, extent_mm=10.0, spacing_mm=1.0)
    from .sources import SourcePatch

    patch = SourcePatch(center=(5.0, 5.0), shape=("rect", 5.0, 5.0), face="z-",
                        irradiance_total=1.0, light_fraction=1.0, heat_fraction=0.0)
    cfg = McConfig(n_photons=n_photons, seed=_SEED)
    _, tallies = run_mc(ph, [patch], cfg)
    measured = tallies.transmitted_weight / tallies.launched_weight
    expected = math.exp(-mu_a * 1.0)
    sigma = math.sqrt(expected * (1.0 - expected) / n_photons)
    if fault == "mu_a_sign":
        expected = math.exp(mu_a * 1.0)
    return _check("MC Beer-Lambert transmission", measured, expected,
                  3.0 * sigma, relative=False)


def check_mc_conservation() -> CheckResult:
    opt = TissueOpticalProps(mu_a=0.16, mu_s=7.0, g=0.89, n=1.4)
    ph = _uniform_phantom("tissue", opt, _DUMMY_THERMAL, extent_mm=20.0, spacing_mm=1.0)
    from .sources import SourcePatch

    patch = SourcePatch(center=(10.0, 10.0), shape=("disc", 4.0), face="z-",
                        irradiance_total=100.0, light_fraction=0.35, heat_fraction=0.65)
    cfg = McConfig(n_photons=20_000, seed=_SEED)
    _, tallies = run_mc(ph, [patch], cfg)
    return _check("MC energy conservation", tallies.conservation_error, 0.0,
                  1e-10, relative=False)


def check_hg_mean_cosine(g=0.89, n=200_000) -> CheckResult:
    state = photon_stream_state(_SEED, 0)
    total = 0.0
    for _ in range(n):
        u, state = next_uniform(state)
        total += sample_hg_cosine(g, u)
    return _check("HG mean scattering cosine", total / n, g, 0.005)


def check_fresnel_normal() -> CheckResult:
    got = fresnel_reflectance(1.0, 1.4, 1.0)
    expected = ((1.4 - 1.0) / (1.4 + 1.0)) ** 2
    return _check("Fresnel normal incidence", got, expected, 1e-12)


def check_pennes_equilibrium() -> CheckResult:
    from .materials import DEFAULT_MATERIALS

    brain = DEFAULT_MATERIALS["brain"]
    ph = _uniform_phantom("brain", brain.optical, brain.thermal,
                          extent_mm=10.0, spacing_mm=1.0)
    bc = ThermalBoundarySpec(h=0.0, convective_faces=())
    T = solve_pennes_steady(ph, DEFAULT_BLOOD, assemble_heat_sources(ph), bc)
    th = brain.thermal
    expected = DEFAULT_BLOOD.T_b + th.q_met / (DEFAULT_BLOOD.perfusion_coupling * th.w_b)
    return _check("Pennes perfusion equilibrium", float(T.values.max()), expected,
                  0.001, relative=False)


def check_transient_to_steady() -> CheckResult:
    from .materials import DEFAULT_MATERIALS

    brain = DEFAULT_MATERIALS["brain"]
    ph = _uniform_phantom("brain", brain.optical, brain.thermal,
                          extent_mm=10.0, spacing_mm=1.0)
    bc = ThermalBoundarySpec(h=0.5, T_inf=25.0)
    q = assemble_heat_sources(ph)
    steady = solve_pennes_steady(ph, DEFAULT_BLOOD, q, bc)
    res = solve_pennes_transient(ph, DEFAULT_BLOOD, q, bc,
                                 InitialTemps({"brain": 33.0}), dt=0.5, t_end=150.0)
    gap = float(np.abs(res.final.values - steady.values).max())
    return _check("transient-to-steady convergence", gap, 0.0, 0.01, relative=False)


def run_validation(fault=None) -> tuple[list[CheckResult], bool]:
    """The full suite; ``fault="mu_a_sign"`` corrupts the absorption sign in
    the Beer-Lambert reference value (failure-path test hook)."""
    checks = [
        check_diffusion_green(),
        check_beer_lambert(fault=fault),
        check_mc_conservation(),
        check_hg_mean_cosine(),
        check_fresnel_normal(),
        check_pennes_equilibrium(),
        check_transient_to_steady(),
    ]
    return checks, all(c.passed for c in checks)


def validation_report(fault=None) -> tuple[str, bool]:
    checks, ok = run_validation(fault=fault)
    lines = [f"validation suite (transport backend: {backend_name()})"]
    lines += [c.line() for c in checks]
    lines.append("overall: " + ("PASS" if ok else "FAIL"))
    return "\n".join(lines) + "\n", ok
