"""Scalar sampling primitives of the photon-packet walk.

These are the reference implementations used by the pure-Python kernel and
the validation suite; the compiled kernel replicates them exactly.
"""

from __future__ import annotations

import math


class SamplerError(ValueError):
    pass


def sample_step(mu_t: float, u: float) -> float:
    """Free path length -ln(u)/mu_t in cm for an attenuation mu_t (1/cm)."""
    if mu_t <= 0:
        raise SamplerError(f"mu_t must be > 0, got {mu_t}")
    if not 0.0 < u <= 1.0:
        # the generator draws from (0, 1], where u = 1 gives a zero step
        raise SamplerError(f"u must be in (0, 1], got {u}")
    return -math.log(u) / mu_t


def sample_hg_cosine(g: float, u: float) -> float:
    """Henyey-Greenstein scattering cosine by inverse-CDF sampling."""
    if not 0.0 <= g < 1.0:
        raise SamplerError(f"g must be in [0, 1), got {g}")
    if g < 1e-12:
        return 2.0 * u - 1.0
    tmp = (1.0 - g * g) / (1.0 - g + 2.0 * g * u)
    cos_t = (1.0 + g * g - tmp * tmp) / (2.0 * g)
    return min(1.0, max(-1.0, cos_t))


def fresnel_reflectance(n_in: float, n_out: float, cos_incident: float) -> float:
    """Unpolarized Fresnel reflectance; 1.0 beyond the critical angle."""
    if n_in < 1 or n_out < 1:
        raise SamplerError("refractive indices must be >= 1")
    if not 0.0 <= cos_incident <= 1.0:
        raise SamplerError(f"cos_incident must be in [0, 1], got {cos_incident}")
    if n_in == n_out:
        return 0.0
    cos_i = cos_incident
    sin_i2 = max(0.0, 1.0 - cos_i * cos_i)
    sin_t2 = (n_in / n_out) ** 2 * sin_i2
    if sin_t2 >= 1.0:
        return 1.0
    cos_t = math.sqrt(1.0 - sin_t2)
    rs = (n_in * cos_i - n_out * cos_t) / (n_in * cos_i + n_out * cos_t)
    rp = (n_in * cos_t - n_out * cos_i) / (n_in * cos_t + n_out * cos_i)
    return 0.5 * (rs * rs + rp * rp)


# splitmix64: one independent, cheaply seedable stream per photon
_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


def photon_stream_state(seed: int, photon_index: int) -> int:
    """Initial splitmix64 state for one photon, decorrelated across photons."""
    return _mix64(_mix64(seed & _MASK) ^ ((photon_index + 1) * _GOLDEN & _MASK))


def next_u64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & _MASK
    return _mix64(state), state


def next_uniform(state: int) -> tuple[float, int]:
    """Uniform double in (0, 1], plus advanced state."""
    z, state = next_u64(state)
    return ((z >> 11) + 1) * (1.0 / 9007199254740992.0), state
