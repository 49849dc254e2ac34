"""Voxelized layered head phantoms.

The grid is uniform and cell-centered.  Axis convention: z is depth with
the outer (illuminated) surface at z = 0; x and y span the lateral extent.
``material_id[ix, iy, iz]`` indexes the phantom's material table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .materials import DEFAULT_MATERIALS, Material, MaterialError
from .units import mm_to_cm


class PhantomError(ValueError):
    """Invalid phantom construction request."""


@dataclass(frozen=True)
class VoxelPhantom:
    dims: tuple[int, int, int]
    spacing: float  # voxel edge length, cm
    material_id: np.ndarray  # int32, shape dims
    materials: tuple[Material, ...]
    # depth (cm) at which each slab layer starts; empty for non-slab geometries
    layer_starts: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.spacing <= 0:
            raise PhantomError(f"spacing must be > 0, got {self.spacing}")
        if self.material_id.shape != self.dims:
            raise PhantomError("material_id shape does not match dims")
        ids = np.unique(self.material_id)
        if ids.min() < 0 or ids.max() >= len(self.materials):
            raise PhantomError("material_id references an undefined material")
        if not any(self.materials[i].name != "air" for i in ids):
            raise PhantomError("phantom must contain at least one non-air material")
        self.material_id.setflags(write=False)

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.dims))

    @property
    def voxel_volume(self) -> float:
        """cm^3"""
        return self.spacing**3

    @property
    def extent(self) -> tuple[float, float, float]:
        """Bounding box edge lengths in cm."""
        return tuple(n * self.spacing for n in self.dims)

    def material_index(self, name: str) -> int:
        for i, m in enumerate(self.materials):
            if m.name == name:
                return i
        raise MaterialError(f"unknown material {name!r}")

    def region_mask(self, name: str) -> np.ndarray:
        return self.material_id == self.material_index(name)

    def axis_centers(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis, cm."""
        n = self.dims[axis]
        return (np.arange(n) + 0.5) * self.spacing

    def material_of_voxel(self, ix: int, iy: int, iz: int) -> Material:
        return self.materials[int(self.material_id[ix, iy, iz])]

    def cortex_mask(self, shell_mm: float = 2.5) -> np.ndarray:
        """Outermost shell of the brain region (default 2.5 mm thick).

        For slab phantoms the shell is measured from the shallowest brain
        depth; for other geometries it is the set of brain voxels within
        the shell distance of any non-brain voxel.
        """
        brain = self.region_mask("brain")
        if not brain.any():
            raise PhantomError("phantom has no brain region")
        shell_cm = mm_to_cm(shell_mm)
        z = self.axis_centers(2)[None, None, :]
        if self.layer_starts:
            z0 = self.axis_centers(2)[brain.any(axis=(0, 1))].min()
            return brain & (z < z0 + shell_cm)
        # generic: distance-to-boundary in voxel steps
        from scipy import ndimage  # local import; only non-slab phantoms need it

        dist = ndimage.distance_transform_edt(brain, sampling=self.spacing)
        return brain & (dist < shell_cm)


def build_layered_phantom(
    layers: list[tuple[str, float]],
    lateral_extent: float,
    spacing: float,
    materials: dict[str, Material] | None = None,
) -> VoxelPhantom:
    """Stack slab layers along z.  All lengths in mm.

    The first layer starts at z = 0 (outer surface); the stack depth is the
    sum of the thicknesses.  Spacing must divide the lateral extent and the
    total depth to within half a voxel, and no layer may be thinner than
    one voxel.
    """
    if not layers:
        raise PhantomError("at least one layer is required")
    table = materials if materials is not None else DEFAULT_MATERIALS
    for name, thickness in layers:
        if name not in table:
            raise MaterialError(f"unknown material {name!r}")
        if thickness <= 0:
            raise PhantomError(f"layer {name!r} has non-positive thickness")
        if thickness < spacing:
            raise PhantomError(
                f"layer {name!r} ({thickness} mm) is thinner than one voxel "
                f"({spacing} mm) and would vanish"
            )
    if spacing <= 0:
        raise PhantomError(f"spacing must be > 0, got {spacing}")

    def _cells(length_mm: float, what: str) -> int:
        n = round(length_mm / spacing)
        if n < 1 or abs(n * spacing - length_mm) > spacing / 2:
            raise PhantomError(f"spacing {spacing} mm does not divide {what} ({length_mm} mm)")
        return n

    nx = ny = _cells(lateral_extent, "lateral extent")
    depth = sum(t for _, t in layers)
    nz = _cells(depth, "stack depth")

    used_names = []
    for name, _ in layers:
        if name not in used_names:
            used_names.append(name)
    mats = tuple(table[name] for name in used_names)
    index_of = {name: i for i, name in enumerate(used_names)}

    material_id = np.empty((nx, ny, nz), dtype=np.int32)
    z_centers = (np.arange(nz) + 0.5) * spacing
    starts = []
    z0 = 0.0
    slab_ids = np.empty(nz, dtype=np.int32)
    slab_ids[:] = index_of[layers[-1][0]]  # remaining depth takes the last layer
    for name, thickness in layers:
        starts.append(z0)
        sel = (z_centers >= z0) & (z_centers < z0 + thickness)
        slab_ids[sel] = index_of[name]
        z0 += thickness
    material_id[:, :, :] = slab_ids[None, None, :]

    return VoxelPhantom(
        dims=(nx, ny, nz),
        spacing=mm_to_cm(spacing),
        material_id=material_id,
        materials=mats,
        layer_starts=tuple(mm_to_cm(s) for s in starts),
    )


def build_shell_phantom(
    layers: list[tuple[str, float]],
    lateral_extent: float,
    spacing: float,
    curvature_radius: float,
    materials: dict[str, Material] | None = None,
) -> VoxelPhantom:
    """Concentric spherical-shell variant for curvature studies (lengths in mm).

    The outer surface is a sphere of the given radius tangent to z = 0 at
    the lateral center; layers are radial shells.  Voxels above the curved
    surface keep the first layer's material (there is no air gap), so the
    phantom remains usable by both optical solvers.
    """
    if curvature_radius <= lateral_extent / 2:
        raise PhantomError("curvature radius must exceed half the lateral extent")
    flat = build_layered_phantom(layers, lateral_extent, spacing, materials)
    nx, ny, nz = flat.dims
    h = flat.spacing
    x = (np.arange(nx) + 0.5) * h - nx * h / 2
    y = (np.arange(ny) + 0.5) * h - ny * h / 2
    z = (np.arange(nz) + 0.5) * h
    R = mm_to_cm(curvature_radius)
    # depth below the curved surface for every voxel
    rad = np.sqrt(x[:, None, None] ** 2 + y[None, :, None] ** 2 + (R - z[None, None, :]) ** 2)
    depth_cm = R - rad

    material_id = np.empty(flat.dims, dtype=np.int32)
    material_id[:] = flat.material_id[0, 0, 0]  # above-surface fill: first layer
    z0 = 0.0
    index_of = {m.name: i for i, m in enumerate(flat.materials)}
    for k, (name, thickness) in enumerate(layers):
        t = mm_to_cm(thickness)
        hi = np.inf if k == len(layers) - 1 else z0 + t
        sel = (depth_cm >= z0) & (depth_cm < hi)
        material_id[sel] = index_of[name]
        z0 += t
    return VoxelPhantom(
        dims=flat.dims,
        spacing=flat.spacing,
        material_id=material_id,
        materials=flat.materials,
        layer_starts=(),
    )
