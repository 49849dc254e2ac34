"""Scalar fields on the phantom grid and trilinear sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FieldError(ValueError):
    pass


@dataclass
class ScalarField:
    """Cell-centered scalar values with grid metadata.

    values has the phantom's (nx, ny, nz) shape; spacing in cm.
    """

    values: np.ndarray
    spacing: float
    quantity: str = "field"
    units: str = ""

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def same_grid(self, other: "ScalarField") -> bool:
        return self.dims == other.dims and np.isclose(self.spacing, other.spacing)

    def sample(self, point_cm) -> float:
        """Trilinear interpolation at a point (cm, phantom corner origin).

        Between the outermost cell centers and the physical boundary the
        boundary-cell value is extended (clamped); points outside the
        phantom raise FieldError.
        """
        p = np.asarray(point_cm, dtype=float)
        h = self.spacing
        for a in range(3):
            if not 0.0 <= p[a] <= self.dims[a] * h:
                raise FieldError(
                    f"query point {tuple(p)} cm outside grid "
                    f"(extent {tuple(n * h for n in self.dims)})"
                )
        # cell-center lattice coordinates
        t = p / h - 0.5
        i0 = np.floor(t).astype(int)
        frac = t - i0
        lo = np.clip(i0, 0, np.array(self.dims) - 1)
        hi = np.clip(i0 + 1, 0, np.array(self.dims) - 1)
        v = 0.0
        for dx in (0, 1):
            wx = 1 - frac[0] if dx == 0 else frac[0]
            ix = lo[0] if dx == 0 else hi[0]
            for dy in (0, 1):
                wy = 1 - frac[1] if dy == 0 else frac[1]
                iy = lo[1] if dy == 0 else hi[1]
                for dz in (0, 1):
                    wz = 1 - frac[2] if dz == 0 else frac[2]
                    iz = lo[2] if dz == 0 else hi[2]
                    v += wx * wy * wz * self.values[ix, iy, iz]
        return float(v)


def fluence_at_depth(field: ScalarField, depth: float, lateral=(None, None)) -> float:
    """Fluence rate at a depth (cm) and lateral position (cm); defaults to
    the lateral center of the grid."""
    h = field.spacing
    x = lateral[0] if lateral[0] is not None else field.dims[0] * h / 2
    y = lateral[1] if lateral[1] is not None else field.dims[1] * h / 2
    return field.sample((x, y, depth))
