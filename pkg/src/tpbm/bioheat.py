"""Perfused tissue heat transfer on the voxel phantom.

Finite-volume discretization of conduction with a blood-perfusion sink
toward arterial temperature, metabolic and optional optical volumetric
heating, convective surface losses and LED contact heat flux.  Steady
solves and implicit-Euler transient stepping share one SPD operator.

All quantities SI (m, W, kg, s), temperatures in deg C.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .fields import ScalarField
from .linsolve import SolverError, StructuredOperator, conjugate_gradient, harmonic_face_values
from .materials import BloodProps, TissueThermalProps
from .phantom import VoxelPhantom
from .sources import FACES, SourcePatch, patch_flux_maps
from .units import MW_CM2C_TO_W_M2C, MW_CM2_TO_W_M2, MW_CM3_TO_W_M3, cm_to_m

PAPER_MODE = "paper-replication"
PHYSICAL_MODE = "physical"

_FACE_SLICES = {
    "x-": np.s_[0, :, :],
    "x+": np.s_[-1, :, :],
    "y-": np.s_[:, 0, :],
    "y+": np.s_[:, -1, :],
    "z-": np.s_[:, :, 0],
    "z+": np.s_[:, :, -1],
}


@dataclass
class ThermalBoundarySpec:
    """Convective losses and LED contact heating.

    h in mW/(cm^2 C) as configured (converted internally), T_inf in C.
    Faces listed in convective_faces exchange with the ambient; all other
    faces are insulated.  heated_patches carry their heat_fraction times
    irradiance as contact flux.
    """

    h: float = 0.5
    T_inf: float = 25.0
    heated_patches: list[SourcePatch] = dc_field(default_factory=list)
    convective_faces: tuple[str, ...] = ("z-",)

    def __post_init__(self):
        if self.h < 0:
            raise ValueError("h must be >= 0")
        for f in self.convective_faces:
            if f not in FACES:
                raise ValueError(f"unknown face {f!r}")


@dataclass
class InitialTemps:
    """Per-material initial temperature (C)."""

    per_material: dict[str, float]

    def __post_init__(self):
        for name, t in self.per_material.items():
            if not np.isfinite(t) or not 0.0 <= t <= 100.0:
                raise ValueError(f"initial temperature for {name!r} out of range: {t}")

    def as_field(self, phantom: VoxelPhantom) -> np.ndarray:
        tab = np.empty(len(phantom.materials))
        for i, mat in enumerate(phantom.materials):
            if mat.name not in self.per_material:
                raise ValueError(f"no initial temperature for material {mat.name!r}")
            tab[i] = self.per_material[mat.name]
        return tab[phantom.material_id]


def assemble_heat_sources(
    phantom: VoxelPhantom,
    fluence: ScalarField | None = None,
    mode: str = PAPER_MODE,
    optical_props=None,
) -> ScalarField:
    """Volumetric heat source q_s per voxel (W/m^3).

    paper-replication: metabolic heat only; the LED heat budget enters as
    boundary flux.  physical: metabolic plus optical deposition mu_a*phi.
    """
    if mode not in (PAPER_MODE, PHYSICAL_MODE):
        raise ValueError(f"unknown heating mode {mode!r}")
    q_tab = np.array([m.thermal.q_met for m in phantom.materials])
    q = q_tab[phantom.material_id].astype(float)
    if mode == PHYSICAL_MODE:
        if fluence is None:
            raise ValueError("physical heating mode needs a fluence field")
        if np.any(fluence.values < 0):
            raise ValueError("fluence field has negative values")
        mua_tab = np.empty(len(phantom.materials))
        for i, mat in enumerate(phantom.materials):
            opt = mat.optical
            if optical_props and mat.name in optical_props:
                opt = optical_props[mat.name]
            mua_tab[i] = opt.mu_a
        # mu_a (1/cm) * phi (mW/cm^2) = mW/cm^3
        q += mua_tab[phantom.material_id] * fluence.values * MW_CM3_TO_W_M3
    return ScalarField(q, phantom.spacing, quantity="heat_source", units="W/m^3")


def _thermal_tables(phantom: VoxelPhantom, props):
    n_mat = len(phantom.materials)
    k = np.empty(n_mat)
    rho = np.empty(n_mat)
    cp = np.empty(n_mat)
    wb = np.empty(n_mat)
    for i, mat in enumerate(phantom.materials):
        th = mat.thermal
        if props and mat.name in props:
            th = props[mat.name]
        k[i], rho[i], cp[i], wb[i] = th.k, th.rho, th.cp, th.w_b
    ids = phantom.material_id
    return k[ids], rho[ids], cp[ids], wb[ids]


def _assemble(
    phantom: VoxelPhantom,
    blood: BloodProps,
    sources: ScalarField,
    bc: ThermalBoundarySpec,
    props: dict[str, TissueThermalProps] | None,
):
    h_m = cm_to_m(phantom.spacing)
    area = h_m * h_m
    vol = h_m**3
    k_cell, rho_cell, cp_cell, wb_cell = _thermal_tables(phantom, props)

    perf = blood.perfusion_coupling * wb_cell  # W/(m^3 C)
    diag = perf * vol
    gx = harmonic_face_values(k_cell, 0) * area / h_m
    gy = harmonic_face_values(k_cell, 1) * area / h_m
    gz = harmonic_face_values(k_cell, 2) * area / h_m
    diag[:-1] += gx
    diag[1:] += gx
    diag[:, :-1] += gy
    diag[:, 1:] += gy
    diag[:, :, :-1] += gz
    diag[:, :, 1:] += gz

    rhs = sources.values * vol + perf * blood.T_b * vol

    h_conv = bc.h * MW_CM2C_TO_W_M2C
    heat_maps = patch_flux_maps(phantom, bc.heated_patches, "heat")
    bnd = {}
    for face in FACES:
        sl = _FACE_SLICES[face]
        flux = heat_maps.get(face)
        q_in = flux * MW_CM2_TO_W_M2 if flux is not None else None
        convective = face in bc.convective_faces and h_conv > 0
        if not convective and q_in is None:
            continue
        c1 = 2.0 * k_cell[sl] / h_m
        if convective:
            c2 = h_conv
            gamma = c1 * c2 / (c1 + c2)
            diag[sl] += gamma * area
            rhs[sl] += gamma * bc.T_inf * area
            if q_in is not None:
                rhs[sl] += (c1 / (c1 + c2)) * q_in * area
            bnd[face] = (gamma, q_in)
        else:
            rhs[sl] += q_in * area
            bnd[face] = (np.zeros(q_in.shape), q_in)

    op = StructuredOperator(diag, gx, gy, gz)
    heat_capacity = rho_cell * cp_cell * vol  # J/C per voxel
    return op, rhs, bnd, perf, heat_capacity


def solve_pennes_steady(
    phantom: VoxelPhantom,
    blood: BloodProps,
    sources: ScalarField,
    bc: ThermalBoundarySpec,
    props: dict[str, TissueThermalProps] | None = None,
    tol: float = 1e-8,
    max_iter: int = 50000,
) -> ScalarField:
    """Steady temperature field (C)."""
    op, rhs, bnd, perf, _ = _assemble(phantom, blood, sources, bc, props)
    if not bnd and not perf.any() and sources.values.any():
        raise SolverError(
            "no convective boundary and no perfusion anywhere: net heat input "
            "admits no steady state"
        )
    if not op.diag.all():
        # pure insulated conduction with no perfusion: singular operator
        raise SolverError("operator is singular (no perfusion and no boundary exchange)")
    T, info = conjugate_gradient(op, rhs, tol=tol, max_iter=max_iter)
    out = ScalarField(T, phantom.spacing, quantity="temperature", units="C")
    out.solver_info = info
    return out


@dataclass
class TransientResult:
    times: np.ndarray
    probes: dict[str, np.ndarray]
    final: ScalarField
    snapshots: dict[float, ScalarField]


def solve_pennes_transient(
    phantom: VoxelPhantom,
    blood: BloodProps,
    sources: ScalarField,
    bc: ThermalBoundarySpec,
    init: InitialTemps | np.ndarray,
    dt: float,
    t_end: float,
    probes: dict[str, tuple[float, float, float]] | None = None,
    sample_every: float = 1.0,
    snapshot_times: list[float] | None = None,
    props: dict[str, TissueThermalProps] | None = None,
    tol: float = 1e-8,
) -> TransientResult:
    """Implicit-Euler time stepping from the initial temperatures.

    Probe points are (x, y, z) in cm; traces are sampled every
    ``sample_every`` seconds starting at the first computed step.
    """
    if dt <= 0 or t_end < dt:
        raise ValueError("need dt > 0 and t_end >= dt")
    op, rhs, _, _, cap = _assemble(phantom, blood, sources, bc, props)
    step_op = StructuredOperator(op.diag + cap / dt, op.gx, op.gy, op.gz)

    T = init.as_field(phantom) if isinstance(init, InitialTemps) else init.astype(float).copy()
    n_steps = int(round(t_end / dt))
    probes = probes or {}
    times = []
    traces = {name: [] for name in probes}
    snapshots = {}
    want_snaps = sorted(snapshot_times or [])
    next_sample = sample_every
    b_scale = float(np.linalg.norm(rhs)) or 1.0

    for step in range(1, n_steps + 1):
        t = step * dt
        b = rhs + (cap / dt) * T
        T, _ = conjugate_gradient(step_op, b, tol=tol * b_scale / float(np.linalg.norm(b)), x0=T)
        if t + 1e-9 >= next_sample or step == n_steps:
            fld = ScalarField(T, phantom.spacing, "temperature", "C")
            times.append(t)
            for name, pt in probes.items():
                traces[name].append(fld.sample(pt))
            while next_sample <= t + 1e-9:
                next_sample += sample_every
        while want_snaps and t + 1e-9 >= want_snaps[0]:
            snapshots[want_snaps.pop(0)] = ScalarField(
                T.copy(), phantom.spacing, "temperature", "C"
            )

    final = ScalarField(T, phantom.spacing, quantity="temperature", units="C")
    return TransientResult(
        times=np.asarray(times),
        probes={k: np.asarray(v) for k, v in traces.items()},
        final=final,
        snapshots=snapshots,
    )


def absorbed_heat_density(
    T: ScalarField, T_init, rho: float, cp: float
) -> ScalarField:
    """Stored heat density rho * cp * (T - T_init) in J/cm^3.

    rho in kg/cm^3 and cp in J/(kg C); T_init may be a scalar or a field
    on the same grid (e.g. a no-source equilibrium solve).
    """
    base = T_init.values if isinstance(T_init, ScalarField) else T_init
    vals = rho * cp * (T.values - base)
    return ScalarField(vals, T.spacing, quantity="heat_dose", units="J/cm^3")


def energy_balance(
    phantom: VoxelPhantom,
    T: ScalarField,
    blood: BloodProps,
    sources: ScalarField,
    bc: ThermalBoundarySpec,
    props: dict[str, TissueThermalProps] | None = None,
) -> dict:
    """Steady power budget (W): volumetric + patch + perfusion = convection."""
    op, rhs, bnd, perf, _ = _assemble(phantom, blood, sources, bc, props)
    h_m = cm_to_m(phantom.spacing)
    area = h_m * h_m
    vol = h_m**3
    tv = T.values
    volumetric = float(sources.values.sum()) * vol
    perfusion_net = float((perf * (blood.T_b - tv)).sum()) * vol
    patch_in = 0.0
    convective_net = 0.0
    h_conv = bc.h * MW_CM2C_TO_W_M2C
    for face, (gamma, q_in) in bnd.items():
        sl = _FACE_SLICES[face]
        convective_net += float((gamma * (tv[sl] - bc.T_inf)).sum()) * area
        if q_in is not None:
            k_cell = _thermal_tables(phantom, props)[0]
            c1 = 2.0 * k_cell[sl] / h_m
            weight = c1 / (c1 + h_conv) if face in bc.convective_faces and h_conv > 0 else 1.0
            patch_in += float((weight * q_in).sum()) * area
    total_in = volumetric + patch_in + perfusion_net
    scale = max(abs(volumetric) + abs(patch_in) + abs(perfusion_net), abs(convective_net), 1e-300)
    return {
        "volumetric_w": volumetric,
        "patch_in_w": patch_in,
        "perfusion_net_w": perfusion_net,
        "convective_out_w": convective_net,
        "residual_rel": abs(total_in - convective_net) / scale,
    }
