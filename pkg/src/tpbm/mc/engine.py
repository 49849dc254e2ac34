"""Monte Carlo photon-packet transport on the voxel phantom.

Launches weighted packets from the source patches (or an isotropic point,
for validation cases), deposits absorbed weight per voxel, and returns the
fluence-rate field plus exact energy-bookkeeping tallies.  Photon walks
are keyed to (seed, photon index), so results are deterministic for a
fixed seed and batch layout regardless of worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..fields import ScalarField
from ..materials import TissueOpticalProps
from ..phantom import VoxelPhantom
from ..sources import SourcePatch, face_axis_side
from ..units import mm_to_cm
from . import backend


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class McConfig:
    n_photons: int = 100_000
    seed: int = 20240810
    roulette_threshold: float = 1e-4
    roulette_survival: float = 0.1
    max_events: int = 10_000_000
    n_batches: int = 64
    n_workers: int = 1

    def __post_init__(self):
        if self.n_photons < 1:
            raise ValueError("n_photons must be >= 1")
        if not 0.0 < self.roulette_threshold < 1.0:
            raise ValueError("roulette_threshold must be in (0, 1)")
        if not 0.0 < self.roulette_survival <= 1.0:
            raise ValueError("roulette_survival must be in (0, 1]")
        if self.n_batches < 1 or self.n_workers < 1:
            raise ValueError("n_batches and n_workers must be >= 1")


@dataclass
class Tallies:
    """Energy bookkeeping in units of launched packet weight."""

    launched_weight: float
    absorbed_weight: float
    reflected_weight: float
    transmitted_weight: float
    roulette_balance: float

    @property
    def conservation_error(self) -> float:
        """Relative error of launched = absorbed + reflected + transmitted
        + roulette_balance; pure bookkeeping, independent of statistics."""
        total = (
            self.absorbed_weight
            + self.reflected_weight
            + self.transmitted_weight
            + self.roulette_balance
        )
        if self.launched_weight == 0:
            return 0.0
        return abs(self.launched_weight - total) / self.launched_weight


def _material_arrays(phantom: VoxelPhantom, props):
    n_mat = len(phantom.materials)
    mua = np.empty(n_mat)
    mus = np.empty(n_mat)
    g = np.empty(n_mat)
    nn = np.empty(n_mat)
    for i, mat in enumerate(phantom.materials):
        opt = mat.optical
        if props and mat.name in props:
            opt = props[mat.name]
        mua[i], mus[i], g[i], nn[i] = opt.mu_a, opt.mu_s, opt.g, opt.n
    return mua, mus, g, nn


def _patch_arrays(phantom: VoxelPhantom, sources: list[SourcePatch]):
    """Kernel-side patch geometry (cm) and launch probabilities."""
    powers = []
    rows = []
    for p in sources:
        power = p.irradiance_total * p.light_fraction * p.area_cm2
        if power <= 0.0:
            continue
        axis, side = face_axis_side(p.face)
        if p.shape[0] == "disc":
            kind, r1, r2 = 0, mm_to_cm(p.shape[1]), 0.0
        else:
            kind, r1, r2 = 1, mm_to_cm(p.shape[1]), mm_to_cm(p.shape[2])
        rows.append((axis, side, kind, mm_to_cm(p.center[0]), mm_to_cm(p.center[1]), r1, r2))
        powers.append(power)
    if not rows:
        raise TransportError("sources carry no light power")
    powers = np.asarray(powers)
    cum = np.cumsum(powers) / powers.sum()
    arr = np.asarray(rows)
    return (
        arr[:, 0].astype(np.int32),
        arr[:, 1].astype(np.int32),
        arr[:, 2].astype(np.int32),
        np.ascontiguousarray(arr[:, 3]),
        np.ascontiguousarray(arr[:, 4]),
        np.ascontiguousarray(arr[:, 5]),
        np.ascontiguousarray(arr[:, 6]),
        cum,
        float(powers.sum()),
    )


def run_mc(
    phantom: VoxelPhantom,
    sources: list[SourcePatch] | None,
    cfg: McConfig,
    props: dict[str, TissueOpticalProps] | None = None,
    point_source: tuple[tuple[float, float, float], float] | None = None,
    ambient_n: float = 1.0,
    return_batch_tallies: bool = False,
):
    """Transport cfg.n_photons packets; returns (FluenceField, Tallies).

    Exactly one of ``sources`` (boundary patches) or ``point_source``
    (((x, y, z) cm, power mW), isotropic, for validation) must be given.
    Fluence per voxel is deposited energy / (mu_a * volume), scaled so the
    launched power matches the sources.
    """
    if (sources is None) == (point_source is None):
        raise TransportError("provide either sources or point_source")
    mua, mus, g, nn = _material_arrays(phantom, props)
    if np.any((mus > 0) & (mua + mus <= 0)):
        raise TransportError("scattering material with zero total attenuation")

    empty_i = np.zeros(0, dtype=np.int32)
    empty_d = np.zeros(0)
    if sources is not None:
        p_axis, p_side, p_kind, p_cu, p_cv, p_r1, p_r2, p_cum, total_power = _patch_arrays(
            phantom, sources
        )
        mode = 0
        point = np.zeros(3)
    else:
        (px, py, pz), total_power = point_source
        if total_power <= 0:
            raise TransportError("point source power must be > 0")
        mode = 1
        point = np.array([px, py, pz], dtype=float)
        p_axis = p_side = p_kind = empty_i
        p_cu = p_cv = p_r1 = p_r2 = p_cum = empty_d

    n = cfg.n_photons
    n_batches = min(cfg.n_batches, n)
    edges = np.linspace(0, n, n_batches + 1).astype(np.int64)
    material_id = np.ascontiguousarray(phantom.material_id, dtype=np.int32)

    def run_batch(b):
        grid = np.zeros(phantom.dims)
        out = backend.run_photons(
            material_id, mua, mus, g, nn, phantom.spacing, mode,
            p_axis, p_side, p_kind, p_cu, p_cv, p_r1, p_r2, p_cum, point,
            cfg.seed, int(edges[b]), int(edges[b + 1]),
            cfg.roulette_threshold, cfg.roulette_survival, cfg.max_events,
            ambient_n, grid,
        )
        return out, grid

    if cfg.n_workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.n_workers) as pool:
            results = list(pool.map(run_batch, range(n_batches)))
    else:
        results = [run_batch(b) for b in range(n_batches)]

    # reduce in batch-index order: deterministic for any worker count
    absorbed = np.zeros(phantom.dims)
    batch_tallies = []
    totals = np.zeros(5)
    nan_total = 0
    for out, grid in results:
        absorbed += grid
        totals += np.asarray(out[:5])
        nan_total += out[5]
        batch_tallies.append(Tallies(*out[:5]))
    if nan_total:
        raise TransportError(f"{nan_total} packets produced non-finite weight/position")

    tallies = Tallies(*totals)
    power_per_packet = total_power / n
    mua_cell = mua[material_id]
    phi = np.zeros(phantom.dims)
    np.divide(
        absorbed * power_per_packet,
        mua_cell * phantom.voxel_volume,
        out=phi,
        where=mua_cell > 0,
    )
    field = ScalarField(phi, phantom.spacing, quantity="fluence_rate", units="mW/cm^2")
    if return_batch_tallies:
        return field, tallies, batch_tallies
    return field, tallies


def compare_mc_diffusion(
    mc_field: ScalarField, diff_field: ScalarField, mask: np.ndarray
) -> dict:
    """Relative-error statistics between the two solvers over a mask.

    Voxels where either field is below 1e-6 of its own maximum are
    excluded (statistically empty or evanescent regions).
    """
    if not mc_field.same_grid(diff_field):
        raise ValueError("fields are on different grids")
    a = mc_field.values
    b = diff_field.values
    floor_a = 1e-6 * a.max()
    floor_b = 1e-6 * b.max()
    sel = mask & (a > floor_a) & (b > floor_b)
    if not sel.any():
        raise ValueError("comparison mask is empty")
    rel = (a[sel] - b[sel]) / b[sel]
    return {
        "max": float(np.abs(rel).max()),
        "mean": float(np.abs(rel).mean()),
        "rms": float(np.sqrt((rel**2).mean())),
        "n_voxels": int(sel.sum()),
    }
