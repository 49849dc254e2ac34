"""Pure-Python photon-packet transport kernel.

Reference implementation of the walk; the compiled Cython kernel
(tpbm.mc._kernel) follows the identical arithmetic, so for a fixed seed
both backends produce the same tallies.  This fallback is slow (roughly
three orders of magnitude below the compiled core) but complete.
"""

from __future__ import annotations

import math

from .samplers import (
    _GOLDEN,
    _MASK,
    _mix64,
    photon_stream_state,
)

_INV_2_53 = 1.0 / 9007199254740992.0


def run_photons(
    material_id,
    mua,
    mus,
    g,
    nn,
    spacing,
    mode,
    p_axis,
    p_side,
    p_kind,
    p_cu,
    p_cv,
    p_r1,
    p_r2,
    p_cum,
    point,
    seed,
    i0,
    i1,
    wth,
    p_surv,
    max_events,
    n_ext,
    absorbed,
):
    nx, ny, nz = material_id.shape
    dims = (nx, ny, nz)
    h = spacing
    n_patches = len(p_axis)

    launched = 0.0
    absorbed_sum = 0.0
    reflected = 0.0
    transmitted = 0.0
    roulette_bal = 0.0
    nan_count = 0

    for idx in range(i0, i1):
        state = photon_stream_state(seed, idx)

        def rng():
            nonlocal state
            state = (state + _GOLDEN) & _MASK
            return ((_mix64(state) >> 11) + 1) * _INV_2_53

        # --- launch ---
        pos = [0.0, 0.0, 0.0]
        vox = [0, 0, 0]
        if mode == 0:
            u0 = rng()
            k = 0
            while k < n_patches - 1 and u0 > p_cum[k]:
                k += 1
            axis = p_axis[k]
            side = p_side[k]
            if p_kind[k] == 0:
                r = p_r1[k] * math.sqrt(rng())
                th = 2.0 * math.pi * rng()
                up = p_cu[k] + r * math.cos(th)
                vp = p_cv[k] + r * math.sin(th)
            else:
                up = p_cu[k] + (2.0 * rng() - 1.0) * p_r1[k]
                vp = p_cv[k] + (2.0 * rng() - 1.0) * p_r2[k]
            ua, va = [a for a in range(3) if a != axis]
            pos[ua] = up
            pos[va] = vp
            pos[axis] = 0.0 if side == 0 else dims[axis] * h
            vox[ua] = min(max(int(up / h), 0), dims[ua] - 1)
            vox[va] = min(max(int(vp / h), 0), dims[va] - 1)
            vox[axis] = 0 if side == 0 else dims[axis] - 1
            direction = [0.0, 0.0, 0.0]
            direction[axis] = 1.0 if side == 0 else -1.0
            entry_axis, entry_side = axis, side
        else:
            pos = [point[0], point[1], point[2]]
            vox = [min(max(int(pos[a] / h), 0), dims[a] - 1) for a in range(3)]
            cos_t = 2.0 * rng() - 1.0
            sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
            psi = 2.0 * math.pi * rng()
            direction = [sin_t * math.cos(psi), sin_t * math.sin(psi), cos_t]
            entry_axis, entry_side = -1, -1

        w = 1.0
        launched += 1.0
        m = material_id[vox[0], vox[1], vox[2]]
        if mode == 0:
            # deterministic specular split at the air-tissue entry
            r_sp = _fresnel(n_ext, nn[m], 1.0)
            reflected += w * r_sp
            w *= 1.0 - r_sp

        local_abs = 0.0
        s = -math.log(rng())  # dimensionless path
        events = 0
        alive = True
        while alive:
            m = material_id[vox[0], vox[1], vox[2]]
            mt = mua[m] + mus[m]
            # distance to the next voxel face along the direction
            d_b = math.inf
            b_axis = -1
            for a in range(3):
                da = direction[a]
                if da > 1e-12:
                    t = ((vox[a] + 1) * h - pos[a]) / da
                elif da < -1e-12:
                    t = (vox[a] * h - pos[a]) / da
                else:
                    continue
                if t < d_b:
                    d_b = t
                    b_axis = a
            d_int = s / mt if mt > 0.0 else math.inf
            if d_int < d_b:
                # interaction inside the voxel
                for a in range(3):
                    pos[a] += direction[a] * d_int
                s = -math.log(rng())
                dw = w * mua[m] / mt
                absorbed[vox[0], vox[1], vox[2]] += dw
                local_abs += dw
                w -= dw
                events += 1
                if not (math.isfinite(w) and math.isfinite(pos[0])):
                    nan_count += 1
                    break
                if events > max_events:
                    roulette_bal += w
                    break
                if w < wth:
                    if rng() < p_surv:
                        roulette_bal -= w * (1.0 / p_surv - 1.0)
                        w /= p_surv
                    else:
                        roulette_bal += w
                        break
                # scatter
                gm = g[m]
                if gm < 1e-12:
                    cos_t = 2.0 * rng() - 1.0
                else:
                    tmp = (1.0 - gm * gm) / (1.0 - gm + 2.0 * gm * rng())
                    cos_t = (1.0 + gm * gm - tmp * tmp) / (2.0 * gm)
                    cos_t = min(1.0, max(-1.0, cos_t))
                psi = 2.0 * math.pi * rng()
                direction = _spin(direction, cos_t, psi)
            else:
                # move to the voxel face
                if mt > 0.0:
                    s -= mt * d_b
                for a in range(3):
                    pos[a] += direction[a] * d_b
                step = 1 if direction[b_axis] > 0.0 else -1
                new_i = vox[b_axis] + step
                pos[b_axis] = (vox[b_axis] + (1 if step > 0 else 0)) * h
                if new_i < 0 or new_i >= dims[b_axis]:
                    # phantom boundary: Fresnel against the exterior
                    cos_i = abs(direction[b_axis])
                    refl = _fresnel(nn[m], n_ext, cos_i)
                    if rng() < refl:
                        direction[b_axis] = -direction[b_axis]
                    else:
                        exit_side = 1 if step > 0 else 0
                        if b_axis == entry_axis and exit_side == entry_side:
                            reflected += w
                        else:
                            transmitted += w
                        break
                else:
                    m2 = material_id[
                        vox[0] if b_axis != 0 else new_i,
                        vox[1] if b_axis != 1 else new_i,
                        vox[2] if b_axis != 2 else new_i,
                    ]
                    if nn[m2] != nn[m]:
                        cos_i = abs(direction[b_axis])
                        refl = _fresnel(nn[m], nn[m2], cos_i)
                        if rng() < refl:
                            direction[b_axis] = -direction[b_axis]
                            continue
                        direction = _refract(direction, b_axis, nn[m], nn[m2])
                    vox[b_axis] = new_i
        absorbed_sum += local_abs

    return launched, absorbed_sum, reflected, transmitted, roulette_bal, nan_count


def _fresnel(n1, n2, cos_i):
    if n1 == n2:
        return 0.0
    sin_i2 = max(0.0, 1.0 - cos_i * cos_i)
    sin_t2 = (n1 / n2) * (n1 / n2) * sin_i2
    if sin_t2 >= 1.0:
        return 1.0
    cos_t = math.sqrt(1.0 - sin_t2)
    rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t)
    rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i)
    return 0.5 * (rs * rs + rp * rp)


def _spin(d, cos_t, psi):
    """Rotate a unit direction by scattering angle acos(cos_t), azimuth psi."""
    ux, uy, uz = d
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    cos_p = math.cos(psi)
    sin_p = math.sin(psi)
    if abs(uz) > 0.99999:
        nx = sin_t * cos_p
        ny = sin_t * sin_p
        nz = cos_t if uz >= 0.0 else -cos_t
    else:
        den = math.sqrt(1.0 - uz * uz)
        nx = sin_t * (ux * uz * cos_p - uy * sin_p) / den + ux * cos_t
        ny = sin_t * (uy * uz * cos_p + ux * sin_p) / den + uy * cos_t
        nz = -sin_t * cos_p * den + uz * cos_t
    norm = math.sqrt(nx * nx + ny * ny + nz * nz)
    return [nx / norm, ny / norm, nz / norm]


def _refract(d, axis, n1, n2):
    """Bend the direction across a flat index interface normal to ``axis``."""
    ratio = n1 / n2
    cos_i = abs(d[axis])
    sin_t2 = ratio * ratio * (1.0 - cos_i * cos_i)
    cos_t = math.sqrt(max(0.0, 1.0 - sin_t2))
    out = [c * ratio for c in d]
    out[axis] = cos_t if d[axis] > 0.0 else -cos_t
    norm = math.sqrt(sum(c * c for c in out))
    return [c / norm for c in out]
