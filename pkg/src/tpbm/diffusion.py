"""Continuous-wave diffusion solve for the fluence rate.

Finite volumes on the voxel grid: cell-centered phi (mW/cm^2), harmonic
face diffusion coefficients, and either a partial-current (Robin) boundary
or a zero-Dirichlet boundary with direct flux injection under the source
patches.  The resulting SPD system is solved by preconditioned CG.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import ScalarField
from .linsolve import SolverError, StructuredOperator, conjugate_gradient, harmonic_face_values
from .materials import TissueOpticalProps
from .phantom import VoxelPhantom
from .sources import FACES, SourcePatch, assemble_source_term, face_axis_side

ROBIN = "robin-partial-current"
DIRICHLET = "dirichlet-zero"


@dataclass
class OpticalBoundarySpec:
    """Boundary handling for the diffusion solve.

    robin-partial-current (default): partial-current condition with
    internal-reflection parameter A derived from the tissue refractive
    index; source patches enter as incoming diffuse flux.
    dirichlet-zero: phi = 0 on every non-illuminated face element, flux
    injection under the patches.
    """

    mode: str = ROBIN
    sources: list[SourcePatch] = dc_field(default_factory=list)

    def __post_init__(self):
        if self.mode not in (ROBIN, DIRICHLET):
            raise ValueError(f"unknown optical boundary mode {self.mode!r}")


def reflection_parameter(n: float) -> float:
    """Internal-reflection boundary parameter A = (1 + r_d) / (1 - r_d)
    with the Groenhuis polynomial fit for the diffuse reflectance r_d."""
    r_d = -1.440 / n**2 + 0.710 / n + 0.668 + 0.0636 * n
    r_d = min(max(r_d, 0.0), 0.999)
    return (1.0 + r_d) / (1.0 - r_d)


def _per_cell_optics(
    phantom: VoxelPhantom, props: dict[str, TissueOpticalProps] | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(D, mu_a, n) per voxel from the material table plus overrides."""
    n_mat = len(phantom.materials)
    d_tab = np.empty(n_mat)
    mua_tab = np.empty(n_mat)
    n_tab = np.empty(n_mat)
    for i, mat in enumerate(phantom.materials):
        opt = mat.optical
        if props and mat.name in props:
            opt = props[mat.name]
        if opt.mu_a + opt.mu_s == 0.0 and opt.d_override is None:
            raise SolverError(
                f"material {mat.name!r} has zero attenuation: no diffusion coefficient"
            )
        d_tab[i] = opt.diffusion
        mua_tab[i] = opt.mu_a
        n_tab[i] = opt.n
    ids = phantom.material_id
    return d_tab[ids], mua_tab[ids], n_tab[ids]


_FACE_SLICES = {
    "x-": (0, np.s_[0, :, :]),
    "x+": (0, np.s_[-1, :, :]),
    "y-": (1, np.s_[:, 0, :]),
    "y+": (1, np.s_[:, -1, :]),
    "z-": (2, np.s_[:, :, 0]),
    "z+": (2, np.s_[:, :, -1]),
}


def _assemble(
    phantom: VoxelPhantom,
    boundary: OpticalBoundarySpec,
    props: dict[str, TissueOpticalProps] | None,
    point_sources,
):
    """Build the SPD operator, the right-hand side, and per-face boundary
    coefficient maps used later for the flux balance."""
    h = phantom.spacing
    area = h * h
    vol = h**3
    d_cell, mua_cell, n_cell = _per_cell_optics(phantom, props)
    if np.all(d_cell == 0):
        raise SolverError("all-zero diffusion coefficient field")

    diag = mua_cell * vol
    gx = harmonic_face_values(d_cell, 0) * h
    gy = harmonic_face_values(d_cell, 1) * h
    gz = harmonic_face_values(d_cell, 2) * h
    diag[:-1] += gx
    diag[1:] += gx
    diag[:, :-1] += gy
    diag[:, 1:] += gy
    diag[:, :, :-1] += gz
    diag[:, :, 1:] += gz

    rhs = np.zeros(phantom.dims)
    flux_maps = assemble_source_term(phantom, boundary.sources)
    # boundary bookkeeping: per face, gamma map (outflow coefficient) and F map
    bnd = {}
    for face in FACES:
        axis, sl = _FACE_SLICES[face]
        d_b = d_cell[sl]
        n_b = n_cell[sl]
        flux = flux_maps.get(face)
        if flux is None:
            flux = np.zeros(d_b.shape)
        c1 = 2.0 * d_b / h
        if boundary.mode == ROBIN:
            r_d = np.clip(-1.440 / n_b**2 + 0.710 / n_b + 0.668 + 0.0636 * n_b, 0.0, 0.999)
            a_par = (1.0 + r_d) / (1.0 - r_d)
            c2 = 1.0 / (2.0 * a_par)
            gamma = c1 * c2 / (c1 + c2)
            diag[sl] += gamma * area
            rhs[sl] += gamma * 4.0 * flux * area
            bnd[face] = ("robin", gamma, flux)
        else:
            lit = flux > 0
            gamma = np.where(lit, 0.0, c1)
            diag[sl] += gamma * area
            rhs[sl] += flux * area
            bnd[face] = ("dirichlet", gamma, flux)

    if point_sources:
        for point_cm, power_mw in point_sources:
            idx = tuple(int(np.floor(c / h)) for c in point_cm)
            for a in range(3):
                if not 0 <= idx[a] < phantom.dims[a]:
                    raise SolverError(f"point source {point_cm} outside phantom")
            rhs[idx] += power_mw

    return StructuredOperator(diag, gx, gy, gz), rhs, bnd, mua_cell


def solve_fluence_cw(
    phantom: VoxelPhantom,
    boundary: OpticalBoundarySpec,
    props: dict[str, TissueOpticalProps] | None = None,
    tol: float = 1e-8,
    max_iter: int = 50000,
    point_sources: list[tuple[tuple[float, float, float], float]] | None = None,
) -> ScalarField:
    """Steady fluence rate phi (mW/cm^2) on the phantom grid.

    point_sources is an optional list of ((x, y, z) cm, power mW)
    isotropic volumetric sources, used by the analytic validation cases.
    The returned field carries a ``solver_info`` attribute with the CG
    iteration count and residual.
    """
    op, rhs, _, _ = _assemble(phantom, boundary, props, point_sources)
    phi, info = conjugate_gradient(op, rhs, tol=tol, max_iter=max_iter)
    # round-off from CG can leave tolerance-level negatives; clamp those only
    floor = -10.0 * tol * max(float(phi.max()), 0.0)
    phi[(phi < 0) & (phi >= floor)] = 0.0
    out = ScalarField(phi, phantom.spacing, quantity="fluence_rate", units="mW/cm^2")
    out.solver_info = info
    return out


def flux_balance(
    phantom: VoxelPhantom,
    field: ScalarField,
    boundary: OpticalBoundarySpec,
    props: dict[str, TissueOpticalProps] | None = None,
    point_sources=None,
) -> dict:
    """Discrete optical power budget of a solved field (mW).

    injected = absorbed + outflow up to the solver tolerance; the relative
    residual is reported against the injected power.
    """
    op, rhs, bnd, mua_cell = _assemble(phantom, boundary, props, point_sources)
    h = phantom.spacing
    area = h * h
    phi = field.values
    absorbed = float((mua_cell * phi).sum()) * h**3
    injected = float(rhs.sum())
    outflow = 0.0
    for face, (_, gamma, _) in bnd.items():
        _, sl = _FACE_SLICES[face]
        outflow += float((gamma * phi[sl]).sum()) * area
    residual = abs(injected - absorbed - outflow) / injected if injected else 0.0
    return {
        "injected_mw": injected,
        "absorbed_mw": absorbed,
        "outflow_mw": outflow,
        "residual_rel": residual,
    }
