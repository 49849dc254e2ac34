"""LED source patches on the phantom boundary and their face flux maps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .phantom import VoxelPhantom
from .units import mm_to_cm

FACES = ("x-", "x+", "y-", "y+", "z-", "z+")

# subsamples per face-element edge when rasterizing patch coverage
_AA = 3


class SourceError(ValueError):
    pass


def face_axis_side(face: str) -> tuple[int, int]:
    """Map a face name to (axis, side) with side 0 at the low coordinate."""
    if face not in FACES:
        raise SourceError(f"unknown face {face!r}")
    axis = "xyz".index(face[0])
    side = 0 if face[1] == "-" else 1
    return axis, side


def face_dims(phantom: VoxelPhantom, face: str) -> tuple[int, int]:
    axis, _ = face_axis_side(face)
    u_ax, v_ax = [a for a in range(3) if a != axis]
    return phantom.dims[u_ax], phantom.dims[v_ax]


@dataclass(frozen=True)
class SourcePatch:
    """One LED footprint on a boundary face.

    center is (u, v) in mm on the face plane (axes other than the face
    axis, ascending order, origin at the face corner).  shape is either
    ("disc", radius_mm) or ("rect", half_width_u_mm, half_width_v_mm).
    irradiance_total in mW/cm^2 at the emitting surface.
    """

    center: tuple[float, float]
    shape: tuple
    face: str = "z-"
    irradiance_total: float = 100.0
    light_fraction: float = 0.35
    heat_fraction: float = 0.65

    def __post_init__(self):
        face_axis_side(self.face)
        if self.irradiance_total < 0:
            raise SourceError("irradiance_total must be >= 0")
        if self.light_fraction < 0 or self.heat_fraction < 0:
            raise SourceError("fractions must be >= 0")
        if abs(self.light_fraction + self.heat_fraction - 1.0) > 1e-9:
            raise SourceError(
                f"light_fraction + heat_fraction must equal 1, got "
                f"{self.light_fraction} + {self.heat_fraction}"
            )
        kind = self.shape[0]
        if kind == "disc":
            if len(self.shape) != 2 or self.shape[1] <= 0:
                raise SourceError("disc shape needs one positive radius")
        elif kind == "rect":
            if len(self.shape) != 3 or self.shape[1] <= 0 or self.shape[2] <= 0:
                raise SourceError("rect shape needs two positive half-widths")
        else:
            raise SourceError(f"unknown patch shape {kind!r}")

    @property
    def area_cm2(self) -> float:
        if self.shape[0] == "disc":
            r = mm_to_cm(self.shape[1])
            return float(np.pi * r * r)
        hu, hv = mm_to_cm(self.shape[1]), mm_to_cm(self.shape[2])
        return 4.0 * hu * hv

    def bounds_mm(self) -> tuple[float, float, float, float]:
        """(u_min, u_max, v_min, v_max) of the footprint, mm."""
        cu, cv = self.center
        if self.shape[0] == "disc":
            r = self.shape[1]
            return cu - r, cu + r, cv - r, cv + r
        return cu - self.shape[1], cu + self.shape[1], cv - self.shape[2], cv + self.shape[2]

    def contains(self, u_mm: np.ndarray, v_mm: np.ndarray) -> np.ndarray:
        cu, cv = self.center
        if self.shape[0] == "disc":
            return (u_mm - cu) ** 2 + (v_mm - cv) ** 2 <= self.shape[1] ** 2
        return (np.abs(u_mm - cu) <= self.shape[1]) & (np.abs(v_mm - cv) <= self.shape[2])


def patch_coverage(phantom: VoxelPhantom, patch: SourcePatch) -> np.ndarray:
    """Fraction of each boundary face element covered by the patch.

    Computed by subsampling each face element; exact for grid-aligned
    rectangles, antialiased for discs.
    """
    nu, nv = face_dims(phantom, patch.face)
    h_mm = phantom.spacing * 10.0
    u_min, u_max, v_min, v_max = patch.bounds_mm()
    if u_min < 0 or v_min < 0 or u_max > nu * h_mm or v_max > nv * h_mm:
        raise SourceError(f"patch at {patch.center} mm extends beyond face {patch.face}")

    sub = (np.arange(_AA) + 0.5) / _AA
    iu = np.arange(nu)
    iv = np.arange(nv)
    u = (iu[:, None] + sub[None, :]).reshape(-1) * h_mm  # (nu*_AA,)
    v = (iv[:, None] + sub[None, :]).reshape(-1) * h_mm
    inside = patch.contains(u[:, None], v[None, :])
    cov = inside.reshape(nu, _AA, nv, _AA).mean(axis=(1, 3))
    return cov


def patch_flux_maps(
    phantom: VoxelPhantom, patches: list[SourcePatch], which: str
) -> dict[str, np.ndarray]:
    """Per-face flux maps (mW/cm^2) for the light or heat channel.

    Rejects overlapping patches on the same face: the flux under two
    footprints would be ambiguous.
    """
    if which not in ("light", "heat"):
        raise SourceError(f"unknown channel {which!r}")
    maps: dict[str, np.ndarray] = {}
    covered: dict[str, np.ndarray] = {}
    for patch in patches:
        cov = patch_coverage(phantom, patch)
        prev = covered.setdefault(patch.face, np.zeros_like(cov))
        if np.any((prev > 0) & (cov > 0)):
            raise SourceError(f"overlapping source patches on face {patch.face}")
        covered[patch.face] = prev + cov
        frac = patch.light_fraction if which == "light" else patch.heat_fraction
        flux = patch.irradiance_total * frac * cov
        if patch.face in maps:
            maps[patch.face] += flux
        else:
            maps[patch.face] = flux
    return maps


def assemble_source_term(
    phantom: VoxelPhantom, sources: list[SourcePatch]
) -> dict[str, np.ndarray]:
    """Incoming diffuse light flux per boundary face element (mW/cm^2)."""
    return patch_flux_maps(phantom, sources, "light")


def total_light_power(phantom: VoxelPhantom, sources: list[SourcePatch]) -> float:
    """Total launched optical power in mW, from the rasterized maps so the
    Monte Carlo normalization matches the diffusion source term exactly."""
    area = phantom.spacing**2
    return sum(float(m.sum()) * area for m in assemble_source_term(phantom, sources).values())
