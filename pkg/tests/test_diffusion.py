import math

import numpy as np
import pytest

from tpbm.diffusion import (
    OpticalBoundarySpec,
    flux_balance,
    reflection_parameter,
    solve_fluence_cw,
)
from tpbm.linsolve import SolverError
from tpbm.materials import Material, TissueOpticalProps, TissueThermalProps
from tpbm.phantom import build_layered_phantom
from tpbm.sources import SourcePatch

THERMAL = TissueThermalProps(k=0.5, rho=1000.0, cp=4000.0)


def uniform_phantom(extent_mm=40.0, spacing_mm=1.0, n=1.0):
    opt = TissueOpticalProps(mu_a=0.16, mu_s=0.76, g=0.89, n=n, d_override=0.043)
    mats = {"tissue": Material("tissue", opt, THERMAL)}
    return build_layered_phantom([("tissue", extent_mm)], extent_mm, spacing_mm, mats)


def test_reflection_parameter_matched():
    # n = 1: no internal reflection, A = (1 + r_d)/(1 - r_d) with r_d at n=1
    r_d = -1.440 + 0.710 + 0.668 + 0.0636
    assert reflection_parameter(1.0) == pytest.approx((1 + r_d) / (1 - r_d))


def test_reflection_parameter_tissue():
    assert reflection_parameter(1.4) == pytest.approx(3.25, abs=0.01)


def test_point_source_green_function():
    """Interior solution vs the infinite-medium kernel (1 mm grid)."""
    ph = uniform_phantom(extent_mm=60.0)
    h = ph.spacing
    center = tuple((d // 2 + 0.5) * h for d in ph.dims)
    field = solve_fluence_cw(ph, OpticalBoundarySpec(), point_sources=[(center, 1.0)])
    D, mu_a = 0.043, 0.16
    mu_eff = math.sqrt(mu_a / D)
    for r in (0.5, 1.0, 1.5):
        got = field.sample((center[0] + r, center[1], center[2]))
        ref = math.exp(-mu_eff * r) / (4 * math.pi * D * r)
        assert got == pytest.approx(ref, rel=0.04)


def test_patch_solution_positive_and_bounded():
    ph = uniform_phantom(n=1.4)
    patch = SourcePatch(center=(20.0, 20.0), shape=("disc", 8.0), irradiance_total=100.0)
    field = solve_fluence_cw(ph, OpticalBoundarySpec(sources=[patch]))
    assert (field.values >= 0).all()
    assert np.isfinite(field.values).all()
    # fluence decays with depth past the first few voxels
    center = field.values[ph.dims[0] // 2, ph.dims[1] // 2, :]
    assert center[-1] < center[5] < center[1]


def test_linearity_and_superposition():
    ph = uniform_phantom(extent_mm=20.0)
    a = SourcePatch(center=(6.0, 10.0), shape=("disc", 3.0), irradiance_total=50.0)
    b = SourcePatch(center=(14.0, 10.0), shape=("disc", 3.0), irradiance_total=80.0)
    tol = 1e-10
    fa = solve_fluence_cw(ph, OpticalBoundarySpec(sources=[a]), tol=tol)
    fb = solve_fluence_cw(ph, OpticalBoundarySpec(sources=[b]), tol=tol)
    fab = solve_fluence_cw(ph, OpticalBoundarySpec(sources=[a, b]), tol=tol)
    scale = fab.values.max()
    assert np.allclose(fab.values, fa.values + fb.values, atol=1e-8 * scale)
    # scaling the irradiance scales the solution
    a2 = SourcePatch(center=(6.0, 10.0), shape=("disc", 3.0), irradiance_total=100.0)
    fa2 = solve_fluence_cw(ph, OpticalBoundarySpec(sources=[a2]), tol=tol)
    assert np.allclose(fa2.values, 2.0 * fa.values, atol=1e-8 * scale)


@pytest.mark.parametrize("mode", ["robin-partial-current", "dirichlet-zero"])
def test_flux_balance_closes(mode):
    ph = uniform_phantom(extent_mm=20.0, n=1.4)
    patch = SourcePatch(center=(10.0, 10.0), shape=("rect", 4.0, 4.0),
                        irradiance_total=100.0)
    boundary = OpticalBoundarySpec(mode=mode, sources=[patch])
    field = solve_fluence_cw(ph, boundary, tol=1e-10)
    bal = flux_balance(ph, field, boundary)
    assert bal["residual_rel"] <= 1e-6
    assert bal["absorbed_mw"] > 0
    assert bal["injected_mw"] > 0


def test_mesh_refinement_stability():
    """Halving the spacing changes the interior profile by a few % at most."""
    results = {}
    for spacing in (1.0, 0.5):
        ph = uniform_phantom(extent_mm=30.0, spacing_mm=spacing, n=1.4)
        patch = SourcePatch(center=(15.0, 15.0), shape=("disc", 8.0),
                            irradiance_total=100.0)
        field = solve_fluence_cw(ph, OpticalBoundarySpec(sources=[patch]), tol=1e-10)
        results[spacing] = [field.sample((1.5, 1.5, z)) for z in (0.5, 1.0, 1.5)]
    for coarse, fine in zip(results[1.0], results[0.5]):
        assert coarse == pytest.approx(fine, rel=0.05)


def test_point_source_outside_raises():
    ph = uniform_phantom(extent_mm=20.0)
    with pytest.raises(SolverError):
        solve_fluence_cw(ph, OpticalBoundarySpec(), point_sources=[((5.0, 5.0, 5.0), 1.0)])
