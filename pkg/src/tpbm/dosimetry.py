"""Coupled runs, cutline profiles, penetration depth and parameter sweeps."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .bioheat import (
    InitialTemps,
    ThermalBoundarySpec,
    TransientResult,
    assemble_heat_sources,
    energy_balance,
    solve_pennes_steady,
    solve_pennes_transient,
)
from .config import BOTH, DIFFUSION, MONTE_CARLO, SimConfig
from .diffusion import OpticalBoundarySpec, flux_balance, solve_fluence_cw
from .fields import ScalarField
from .mc import McConfig, compare_mc_diffusion, run_mc
from .phantom import VoxelPhantom
from .units import mm_to_cm

DEFAULT_INITIAL_C = 33.0
# reporting threshold for the absolute penetration criterion, mW/cm^2
DEFAULT_ABS_THRESHOLD = 0.01

BEYOND_PROFILE = math.inf


class DosimetryError(ValueError):
    pass


@dataclass(frozen=True)
class CutlineSpec:
    """A sampled straight line through the phantom (endpoints in mm)."""

    start_mm: tuple[float, float, float]
    end_mm: tuple[float, float, float]
    samples: int = 200

    def __post_init__(self):
        if self.samples < 2:
            raise DosimetryError("cutline needs at least 2 samples")
        if all(abs(a - b) < 1e-12 for a, b in zip(self.start_mm, self.end_mm)):
            raise DosimetryError("cutline endpoints coincide")


@dataclass
class Profile:
    """1D samples along a cutline: arc position (cm) and field value."""

    positions_cm: np.ndarray
    values: np.ndarray
    quantity: str
    units: str


def extract_cutline(field: ScalarField, spec: CutlineSpec) -> Profile:
    """Trilinear samples at equally spaced points from start to end."""
    a = np.array([mm_to_cm(c) for c in spec.start_mm])
    b = np.array([mm_to_cm(c) for c in spec.end_mm])
    t = np.linspace(0.0, 1.0, spec.samples)
    length = float(np.linalg.norm(b - a))
    values = np.array([field.sample(tuple(a + ti * (b - a))) for ti in t])
    return Profile(t * length, values, field.quantity, field.units)


def penetration_depth(profile: Profile, criterion="1/e") -> float:
    """Depth (cm) at which the profile falls below the criterion.

    "1/e": threshold is 1/e of the first subsurface sample, depth measured
    from that sample's position.  A number: absolute threshold in the
    profile's units, depth measured from the profile start.  The crossing
    is located by linear interpolation; returns inf when the criterion is
    never met within the profile ("beyond profile").
    """
    pos, val = profile.positions_cm, profile.values
    if val[0] <= 0:
        raise DosimetryError("profile must start with a positive value")
    if criterion == "1/e":
        start = 1
        threshold = val[1] / math.e
    else:
        start = 0
        threshold = float(criterion)
        if threshold < 0:
            raise DosimetryError("absolute threshold must be >= 0")
    origin = pos[start]
    for i in range(start + 1, len(val)):
        if val[i] < threshold:
            v0, v1 = val[i - 1], val[i]
            frac = (v0 - threshold) / (v0 - v1) if v0 != v1 else 0.0
            return float(pos[i - 1] + frac * (pos[i] - pos[i - 1]) - origin)
    return BEYOND_PROFILE


@dataclass(frozen=True)
class SweepSpec:
    """parameter: "source-irradiance" (values mW/cm^2) or
    "wavelength-property-set" (values are property-set file paths)."""

    parameter: str
    values: tuple

    def __post_init__(self):
        if self.parameter not in ("source-irradiance", "wavelength-property-set"):
            raise DosimetryError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise DosimetryError("sweep needs at least one value")


@dataclass
class RunReport:
    """Summary quantities of one coupled run."""

    peak_scalp_temp_c: float = math.nan
    cortex_max_rise_c: float = math.nan
    cortex_fluence_min_mw_cm2: float = math.nan
    cortex_fluence_max_mw_cm2: float = math.nan
    penetration_depth_cm: dict = dc_field(default_factory=dict)
    mc_vs_diffusion: dict | None = None
    optical_residual_rel: float = math.nan
    mc_conservation_error: float = math.nan
    thermal_residual_rel: float = math.nan
    runtime_s: float = math.nan
    extras: dict = dc_field(default_factory=dict)

    def items(self):
        out = [
            ("peak_scalp_temp_c", self.peak_scalp_temp_c),
            ("cortex_max_rise_c", self.cortex_max_rise_c),
            ("cortex_fluence_min_mw_cm2", self.cortex_fluence_min_mw_cm2),
            ("cortex_fluence_max_mw_cm2", self.cortex_fluence_max_mw_cm2),
        ]
        for name, depth in self.penetration_depth_cm.items():
            out.append((f"penetration_depth_{name}_cm", depth))
        if self.mc_vs_diffusion:
            for k, v in self.mc_vs_diffusion.items():
                out.append((f"mc_vs_diffusion_{k}", v))
        out.append(("optical_residual_rel", self.optical_residual_rel))
        out.append(("mc_conservation_error", self.mc_conservation_error))
        out.append(("thermal_residual_rel", self.thermal_residual_rel))
        out.append(("runtime_s", self.runtime_s))
        out.extend(sorted(self.extras.items()))
        return out

    def to_keyvalue(self) -> str:
        return "\n".join(f"{k} = {v!r}" for k, v in self.items()) + "\n"

    def to_text(self) -> str:
        lines = ["run report", "----------"]
        for k, v in self.items():
            if isinstance(v, float):
                lines.append(f"{k:<32} {v:.6g}")
            else:
                lines.append(f"{k:<32} {v}")
        return "\n".join(lines) + "\n"


@dataclass
class CoupledResult:
    phantom: VoxelPhantom
    fluence: dict[str, ScalarField]
    temperature: dict[str, ScalarField]
    transient: TransientResult | None
    report: RunReport


def _initial_field(cfg: SimConfig, phantom: VoxelPhantom) -> InitialTemps:
    temps = {m.name: cfg.thermal.initial_temps_c.get(m.name, DEFAULT_INITIAL_C)
             for m in phantom.materials}
    return InitialTemps(temps)


def _fluence_cutline_spec(cfg: SimConfig) -> CutlineSpec | None:
    for c in cfg.output.cutlines:
        if c.quantity == "fluence":
            return CutlineSpec(c.start_mm, c.end_mm, c.samples)
    return None


def run_coupled(cfg: SimConfig) -> CoupledResult:
    """One full optical + thermal run per the config."""
    t0 = time.time()
    phantom = cfg.build_phantom()
    report = RunReport()
    fluence: dict[str, ScalarField] = {}

    opt = cfg.optics
    if opt.solver in (DIFFUSION, BOTH):
        boundary = OpticalBoundarySpec(mode=opt.boundary_mode, sources=cfg.sources)
        fluence["diffusion"] = solve_fluence_cw(phantom, boundary, tol=opt.tolerance)
        bal = flux_balance(phantom, fluence["diffusion"], boundary)
        report.optical_residual_rel = bal["residual_rel"]
    if opt.solver in (MONTE_CARLO, BOTH):
        mc_cfg = McConfig(n_photons=opt.photons, seed=opt.seed,
                          n_batches=opt.batches, n_workers=opt.workers)
        fluence["mc"], tallies = run_mc(phantom, cfg.sources, mc_cfg)
        report.mc_conservation_error = tallies.conservation_error
    if opt.solver == BOTH:
        mask = _diffusive_mask(phantom, cfg)
        try:
            report.mc_vs_diffusion = compare_mc_diffusion(
                fluence["mc"], fluence["diffusion"], mask
            )
        except ValueError:
            # phantom thinner than the diffusive regime: nothing to compare
            report.mc_vs_diffusion = None
    phi = fluence.get("diffusion", fluence.get("mc"))

    heat = assemble_heat_sources(phantom, fluence=phi, mode=cfg.thermal.heating_mode)
    bc = ThermalBoundarySpec(h=cfg.thermal.h_mw_cm2c, T_inf=cfg.thermal.T_inf_c,
                             heated_patches=cfg.sources)
    steady = solve_pennes_steady(phantom, cfg.blood, heat, bc, tol=cfg.thermal.tolerance)
    report.thermal_residual_rel = energy_balance(
        phantom, steady, cfg.blood, heat, bc)["residual_rel"]

    # no-light equilibrium: metabolic/perfusion balance only, same boundary losses
    bc0 = ThermalBoundarySpec(h=cfg.thermal.h_mw_cm2c, T_inf=cfg.thermal.T_inf_c)
    heat0 = assemble_heat_sources(phantom)
    equilibrium = solve_pennes_steady(phantom, cfg.blood, heat0, bc0,
                                      tol=cfg.thermal.tolerance)

    temperature = {"steady": steady, "equilibrium": equilibrium}
    transient = None
    if cfg.thermal.transient.enabled:
        tr = cfg.thermal.transient
        probes = {name: tuple(mm_to_cm(c) for c in pt)
                  for name, pt in tr.probes_mm.items()}
        if tr.start_from == "equilibrium":
            init = equilibrium.values.copy()
        else:
            init = _initial_field(cfg, phantom)
        transient = solve_pennes_transient(
            phantom, cfg.blood, heat, bc, init,
            dt=tr.dt_s, t_end=tr.t_end_s, probes=probes,
            tol=cfg.thermal.tolerance,
        )
        temperature["final"] = transient.final

    names = {m.name for m in phantom.materials}
    scalp = phantom.region_mask("scalp") if "scalp" in names else np.zeros(phantom.dims, bool)
    cortex = phantom.cortex_mask() if "brain" in names else np.zeros(phantom.dims, bool)
    if scalp.any():
        report.peak_scalp_temp_c = float(steady.values[scalp].max())
    if cortex.any():
        report.cortex_max_rise_c = float(
            (steady.values - equilibrium.values)[cortex].max()
        )
        if phi is not None:
            report.cortex_fluence_min_mw_cm2 = float(phi.values[cortex].min())
            report.cortex_fluence_max_mw_cm2 = float(phi.values[cortex].max())

    line = _fluence_cutline_spec(cfg)
    if line is not None and phi is not None:
        prof = extract_cutline(phi, line)
        if prof.values[0] > 0:
            report.penetration_depth_cm["one_over_e"] = penetration_depth(prof, "1/e")
            report.penetration_depth_cm["absolute"] = penetration_depth(
                prof, DEFAULT_ABS_THRESHOLD
            )

    report.runtime_s = time.time() - t0
    return CoupledResult(phantom, fluence, temperature, transient, report)


def _diffusive_mask(phantom: VoxelPhantom, cfg: SimConfig) -> np.ndarray:
    """Voxels deeper than 3 transport mean free paths from the source face
    and more than 1 from the lateral boundaries."""
    mfp = []
    for mat in phantom.materials:
        opt = mat.optical
        total = opt.mu_a + opt.mu_s_prime
        if total > 0:
            mfp.append(1.0 / total)
    l_tr = max(mfp) if mfp else phantom.spacing
    h = phantom.spacing
    nx, ny, nz = phantom.dims
    x = (np.arange(nx) + 0.5) * h
    y = (np.arange(ny) + 0.5) * h
    z = (np.arange(nz) + 0.5) * h
    mask = np.ones(phantom.dims, dtype=bool)
    mask &= (z[None, None, :] > 3.0 * l_tr)
    mask &= (x[:, None, None] > l_tr) & (x[:, None, None] < nx * h - l_tr)
    mask &= (y[None, :, None] > l_tr) & (y[None, :, None] < ny * h - l_tr)
    return mask


@dataclass
class SweepRow:
    value: object
    report: RunReport | None
    error: str | None = None


@dataclass
class SweepResult:
    rows: list[SweepRow]
    partial: bool = False


def _apply_sweep_value(cfg: SimConfig, spec: SweepSpec, value) -> SimConfig:
    if spec.parameter == "source-irradiance":
        sources = [replace(p, irradiance_total=float(value)) for p in cfg.sources]
        return replace(cfg, sources=sources)
    # wavelength-property-set: a YAML file of per-material optical overrides
    import yaml

    from .config import ConfigError, _Section, _parse_materials

    with open(value) as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict) or "materials" not in data:
        raise ConfigError(f"{value}: property set needs a materials section")
    # reuse the config parser so diagnostics and invariants match
    base = {
        name: {
            "optical": data["materials"].get(name, {}).get("optical"),
            "thermal": {
                "k_w_mc": m.thermal.k, "rho_kg_m3": m.thermal.rho,
                "cp_j_kgc": m.thermal.cp, "w_b_per_s": m.thermal.w_b,
                "q_met_w_m3": m.thermal.q_met,
            },
        }
        for name, m in cfg.materials.items()
    }
    for name, entry in base.items():
        if entry["optical"] is None:
            raise ConfigError(
                f"{value}: materials.{name}.optical missing (property sets must "
                "be complete per material)"
            )
    materials = _parse_materials(_Section(base, "materials", [], True))
    return replace(cfg, materials=materials)


def run_sweep(cfg: SimConfig, spec: SweepSpec) -> SweepResult:
    """One coupled run per sweep value, in input order.

    A failing run aborts the sweep; already-computed rows are returned with
    the result flagged as partial.
    """
    rows: list[SweepRow] = []
    for value in spec.values:
        try:
            run_cfg = _apply_sweep_value(cfg, spec, value)
            result = run_coupled(run_cfg)
        except Exception as e:  # noqa: BLE001 - single-run failure flags the sweep
            rows.append(SweepRow(value, None, error=str(e)))
            return SweepResult(rows, partial=True)
        rows.append(SweepRow(value, result.report))
    return SweepResult(rows)
