"""Unit conversion factors.

Optical quantities are kept in the tissue-optics convention (cm, mW),
thermal quantities in SI (m, W).  Every factor below is an exact rational
so conversions introduce no rounding beyond the multiply itself.
"""

C_VACUUM_CM_S = 2.99792458e10  # speed of light in vacuum, cm/s

MM_PER_CM = 10.0
CM_PER_M = 100.0

# 1 mW/cm^2 = 10 W/m^2
MW_CM2_TO_W_M2 = 10.0
# 1 1/cm = 100 1/m
PER_CM_TO_PER_M = 100.0
# 1 mW/cm^3 = 1e4 W/m^3
MW_CM3_TO_W_M3 = 1.0e4
# 1 J/cm^3 = 1e6 J/m^3
J_CM3_TO_J_M3 = 1.0e6
# convection coefficient: 1 mW/(cm^2 C) = 10 W/(m^2 C)
MW_CM2C_TO_W_M2C = 10.0


def mm_to_cm(x_mm: float) -> float:
    return x_mm / MM_PER_CM


def cm_to_m(x_cm: float) -> float:
    return x_cm / CM_PER_M


UNIT_TABLE = [
    ("irradiance", "mW/cm^2", "W/m^2", "x 10"),
    ("absorption/scattering", "1/cm", "1/m", "x 100"),
    ("volumetric heat", "mW/cm^3", "W/m^3", "x 1e4"),
    ("heat dose", "J/cm^3", "J/m^3", "x 1e6"),
    ("convection coefficient", "mW/(cm^2.C)", "W/(m^2.C)", "x 10"),
    ("length", "mm", "cm", "/ 10"),
]


def explain_units() -> str:
    """Human-readable table of the exact conversion factors applied at parse time."""
    lines = ["quantity                  config unit      internal unit    factor"]
    for name, src, dst, factor in UNIT_TABLE:
        lines.append(f"{name:<25} {src:<16} {dst:<16} {factor}")
    return "\n".join(lines)
