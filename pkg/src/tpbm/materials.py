"""Tissue property tables and derived optical quantities.

Optical coefficients use the tissue-optics convention (1/cm, cm), thermal
properties SI.  The shipped 810 nm head table lists the per-tissue
diffusion coefficients explicitly (``d_override``) because the published
(mu_a, mu_s, g, D) tuples are not mutually consistent under
``diffusion_coefficient``; the listed D values are taken as authoritative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .units import C_VACUUM_CM_S


class MaterialError(ValueError):
    """Invalid material definition or lookup."""


@dataclass(frozen=True)
class TissueOpticalProps:
    """Optical coefficients of one material.

    mu_a, mu_s in 1/cm, g and n dimensionless, d_override in cm (takes
    precedence over the value derived from mu_a and mu_s' when set).
    """

    mu_a: float
    mu_s: float
    g: float
    n: float
    d_override: float | None = None

    def __post_init__(self):
        if self.mu_a < 0:
            raise MaterialError(f"mu_a must be >= 0, got {self.mu_a}")
        if self.mu_s < 0:
            raise MaterialError(f"mu_s must be >= 0, got {self.mu_s}")
        if not 0 <= self.g < 1:
            raise MaterialError(f"g must be in [0, 1), got {self.g}")
        if self.n < 1:
            raise MaterialError(f"n must be >= 1, got {self.n}")
        if self.d_override is not None and self.d_override <= 0:
            raise MaterialError(f"d_override must be > 0, got {self.d_override}")

    @property
    def mu_s_prime(self) -> float:
        return reduced_scattering(self.mu_s, self.g)

    @property
    def diffusion(self) -> float:
        """Diffusion coefficient in cm (override if provided)."""
        if self.d_override is not None:
            return self.d_override
        return diffusion_coefficient(self.mu_a, self.mu_s_prime)

    @property
    def mu_t(self) -> float:
        """Total attenuation mu_a + mu_s in 1/cm."""
        return self.mu_a + self.mu_s


@dataclass(frozen=True)
class TissueThermalProps:
    """Thermal coefficients of one material (SI).

    k in W/(m C), rho in kg/m^3, cp in J/(kg C), w_b blood perfusion rate
    in 1/s, q_met metabolic heat in W/m^3.
    """

    k: float
    rho: float
    cp: float
    w_b: float = 0.0
    q_met: float = 0.0

    def __post_init__(self):
        if self.k <= 0 or self.rho <= 0 or self.cp <= 0:
            raise MaterialError("k, rho and cp must be > 0")
        if self.w_b < 0 or self.q_met < 0:
            raise MaterialError("w_b and q_met must be >= 0")


@dataclass(frozen=True)
class BloodProps:
    """Arterial blood: density kg/m^3, specific heat J/(kg C), temperature C."""

    rho_b: float = 1050.0
    c_b: float = 3600.0
    T_b: float = 37.0

    def __post_init__(self):
        if self.rho_b <= 0 or self.c_b <= 0 or self.T_b <= 0:
            raise MaterialError("blood properties must be positive")
        if not 30.0 <= self.T_b <= 42.0:
            raise MaterialError(f"T_b out of physiological range: {self.T_b}")

    @property
    def perfusion_coupling(self) -> float:
        """rho_b * c_b in J/(m^3 C); multiply by w_b for the sink strength."""
        return self.rho_b * self.c_b


@dataclass(frozen=True)
class Material:
    name: str
    optical: TissueOpticalProps
    thermal: TissueThermalProps


def reduced_scattering(mu_s: float, g: float) -> float:
    """Reduced scattering coefficient mu_s * (1 - g), 1/cm."""
    if mu_s < 0:
        raise MaterialError(f"mu_s must be >= 0, got {mu_s}")
    if not 0 <= g < 1:
        raise MaterialError(f"g must be in [0, 1), got {g}")
    return mu_s * (1.0 - g)


def diffusion_coefficient(mu_a: float, mu_s_prime: float) -> float:
    """Diffusion coefficient 1 / (3 (mu_a + mu_s')), cm."""
    total = mu_a + mu_s_prime
    if total <= 0:
        raise MaterialError("mu_a + mu_s' must be > 0")
    return 1.0 / (3.0 * total)


def effective_attenuation(mu_a: float, D: float) -> float:
    """Effective attenuation sqrt(mu_a / D), 1/cm."""
    if D <= 0:
        raise MaterialError(f"D must be > 0, got {D}")
    if mu_a < 0:
        raise MaterialError(f"mu_a must be >= 0, got {mu_a}")
    return math.sqrt(mu_a / D)


def light_speed_in_medium(n: float) -> float:
    """Phase velocity c/n in cm/s."""
    if n < 1:
        raise MaterialError(f"n must be >= 1, got {n}")
    return C_VACUUM_CM_S / n


# Shipped 810 nm head tissue table.  Scalp and skull share one optical row.
DEFAULT_BLOOD = BloodProps()

DEFAULT_MATERIALS = {
    "scalp": Material(
        "scalp",
        TissueOpticalProps(mu_a=0.16, mu_s=0.76, g=0.89, n=1.4, d_override=0.043),
        TissueThermalProps(k=0.50, rho=1200.0, cp=4000.0, w_b=0.00143, q_met=363.0),
    ),
    "skull": Material(
        "skull",
        TissueOpticalProps(mu_a=0.16, mu_s=0.76, g=0.89, n=1.4, d_override=0.043),
        TissueThermalProps(k=1.15, rho=1990.0, cp=2300.0, w_b=0.000143, q_met=70.0),
    ),
    "brain": Material(
        "brain",
        TissueOpticalProps(mu_a=0.57, mu_s=0.80, g=0.89, n=1.4, d_override=0.039),
        TissueThermalProps(k=0.57, rho=1050.0, cp=3650.0, w_b=0.08, q_met=10437.0),
    ),
    "led": Material(
        "led",
        TissueOpticalProps(mu_a=0.0, mu_s=0.0, g=0.0, n=1.4),
        TissueThermalProps(k=0.20, rho=1190.0, cp=1170.0),
    ),
}
