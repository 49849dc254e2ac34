# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled photon-packet transport kernel.

Arithmetic-identical port of tpbm.mc._pykernel.run_photons; see that
module for the commented reference version.
"""

from libc.math cimport INFINITY, cos, fabs, isfinite, log, sin, sqrt

import numpy as np
cimport numpy as cnp

cdef double PI = 3.141592653589793
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15UL


cdef inline unsigned long long _mix64(unsigned long long z) nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9UL
    z ^= z >> 27
    z *= 0x94D049BB133111EBUL
    z ^= z >> 31
    return z


cdef inline double _rng(unsigned long long *state) nogil:
    state[0] += GOLDEN
    return <double>((_mix64(state[0]) >> 11) + 1) * INV_2_53


cdef inline double _fresnel(double n1, double n2, double cos_i) nogil:
    cdef double sin_i2, sin_t2, cos_t, rs, rp
    if n1 == n2:
        return 0.0
    sin_i2 = 1.0 - cos_i * cos_i
    if sin_i2 < 0.0:
        sin_i2 = 0.0
    sin_t2 = (n1 / n2) * (n1 / n2) * sin_i2
    if sin_t2 >= 1.0:
        return 1.0
    cos_t = sqrt(1.0 - sin_t2)
    rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t)
    rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i)
    return 0.5 * (rs * rs + rp * rp)


def run_photons(
    const cnp.int32_t[:, :, ::1] material_id,
    double[::1] mua,
    double[::1] mus,
    double[::1] g,
    double[::1] nn,
    double spacing,
    int mode,
    cnp.int32_t[::1] p_axis,
    cnp.int32_t[::1] p_side,
    cnp.int32_t[::1] p_kind,
    double[::1] p_cu,
    double[::1] p_cv,
    double[::1] p_r1,
    double[::1] p_r2,
    double[::1] p_cum,
    double[::1] point,
    unsigned long long seed,
    long i0,
    long i1,
    double wth,
    double p_surv,
    long max_events,
    double n_ext,
    double[:, :, ::1] absorbed,
):
    cdef long dims[3]
    dims[0] = material_id.shape[0]
    dims[1] = material_id.shape[1]
    dims[2] = material_id.shape[2]
    cdef double h = spacing
    cdef long n_patches = p_axis.shape[0]

    cdef double launched = 0.0
    cdef double absorbed_sum = 0.0
    cdef double reflected = 0.0
    cdef double transmitted = 0.0
    cdef double roulette_bal = 0.0
    cdef long nan_count = 0

    cdef unsigned long long state
    cdef long idx, k, a, events, new_i, b_axis, step_dir, exit_side
    cdef int axis, side, entry_axis, entry_side, ua, va, m, m2, alive
    cdef double u0, r, th, up, vp, cos_t, sin_t, psi, w, r_sp, local_abs, s
    cdef double mt, d_b, d_int, da, t, dw, gm, tmp, cos_i, refl
    cdef double ratio, sin_t2, den, cos_p, sin_p, nx_, ny_, nz_, norm
    cdef double pos[3]
    cdef double direction[3]
    cdef long vox[3]

    with nogil:
        for idx in range(i0, i1):
            state = _mix64(_mix64(seed) ^ (<unsigned long long>(idx + 1) * GOLDEN))

            if mode == 0:
                u0 = _rng(&state)
                k = 0
                while k < n_patches - 1 and u0 > p_cum[k]:
                    k += 1
                axis = p_axis[k]
                side = p_side[k]
                if p_kind[k] == 0:
                    r = p_r1[k] * sqrt(_rng(&state))
                    th = 2.0 * PI * _rng(&state)
                    up = p_cu[k] + r * cos(th)
                    vp = p_cv[k] + r * sin(th)
                else:
                    up = p_cu[k] + (2.0 * _rng(&state) - 1.0) * p_r1[k]
                    vp = p_cv[k] + (2.0 * _rng(&state) - 1.0) * p_r2[k]
                ua = 1 if axis == 0 else 0
                va = 1 if axis == 2 else 2
                pos[ua] = up
                pos[va] = vp
                pos[axis] = 0.0 if side == 0 else dims[axis] * h
                vox[ua] = <long>(up / h)
                if vox[ua] < 0:
                    vox[ua] = 0
                if vox[ua] > dims[ua] - 1:
                    vox[ua] = dims[ua] - 1
                vox[va] = <long>(vp / h)
                if vox[va] < 0:
                    vox[va] = 0
                if vox[va] > dims[va] - 1:
                    vox[va] = dims[va] - 1
                vox[axis] = 0 if side == 0 else dims[axis] - 1
                direction[0] = 0.0
                direction[1] = 0.0
                direction[2] = 0.0
                direction[axis] = 1.0 if side == 0 else -1.0
                entry_axis = axis
                entry_side = side
            else:
                pos[0] = point[0]
                pos[1] = point[1]
                pos[2] = point[2]
                for a in range(3):
                    vox[a] = <long>(pos[a] / h)
                    if vox[a] < 0:
                        vox[a] = 0
                    if vox[a] > dims[a] - 1:
                        vox[a] = dims[a] - 1
                cos_t = 2.0 * _rng(&state) - 1.0
                sin_t = sqrt(max(0.0, 1.0 - cos_t * cos_t))
                psi = 2.0 * PI * _rng(&state)
                direction[0] = sin_t * cos(psi)
                direction[1] = sin_t * sin(psi)
                direction[2] = cos_t
                entry_axis = -1
                entry_side = -1

            w = 1.0
            launched += 1.0
            m = material_id[vox[0], vox[1], vox[2]]
            if mode == 0:
                r_sp = _fresnel(n_ext, nn[m], 1.0)
                reflected += w * r_sp
                w *= 1.0 - r_sp

            local_abs = 0.0
            s = -log(_rng(&state))
            events = 0
            alive = 1
            while alive:
                m = material_id[vox[0], vox[1], vox[2]]
                mt = mua[m] + mus[m]
                d_b = INFINITY
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
                d_int = s / mt if mt > 0.0 else INFINITY
                if d_int < d_b:
                    for a in range(3):
                        pos[a] += direction[a] * d_int
                    s = -log(_rng(&state))
                    dw = w * mua[m] / mt
                    absorbed[vox[0], vox[1], vox[2]] += dw
                    local_abs += dw
                    w -= dw
                    events += 1
                    if not (isfinite(w) and isfinite(pos[0])):
                        nan_count += 1
                        break
                    if events > max_events:
                        roulette_bal += w
                        break
                    if w < wth:
                        if _rng(&state) < p_surv:
                            roulette_bal -= w * (1.0 / p_surv - 1.0)
                            w /= p_surv
                        else:
                            roulette_bal += w
                            break
                    gm = g[m]
                    if gm < 1e-12:
                        cos_t = 2.0 * _rng(&state) - 1.0
                    else:
                        tmp = (1.0 - gm * gm) / (1.0 - gm + 2.0 * gm * _rng(&state))
                        cos_t = (1.0 + gm * gm - tmp * tmp) / (2.0 * gm)
                        if cos_t > 1.0:
                            cos_t = 1.0
                        elif cos_t < -1.0:
                            cos_t = -1.0
                    psi = 2.0 * PI * _rng(&state)
                    sin_t = sqrt(max(0.0, 1.0 - cos_t * cos_t))
                    cos_p = cos(psi)
                    sin_p = sin(psi)
                    if fabs(direction[2]) > 0.99999:
                        nx_ = sin_t * cos_p
                        ny_ = sin_t * sin_p
                        nz_ = cos_t if direction[2] >= 0.0 else -cos_t
                    else:
                        den = sqrt(1.0 - direction[2] * direction[2])
                        nx_ = sin_t * (direction[0] * direction[2] * cos_p - direction[1] * sin_p) / den + direction[0] * cos_t
                        ny_ = sin_t * (direction[1] * direction[2] * cos_p + direction[0] * sin_p) / den + direction[1] * cos_t
                        nz_ = -sin_t * cos_p * den + direction[2] * cos_t
                    norm = sqrt(nx_ * nx_ + ny_ * ny_ + nz_ * nz_)
                    direction[0] = nx_ / norm
                    direction[1] = ny_ / norm
                    direction[2] = nz_ / norm
                else:
                    if mt > 0.0:
                        s -= mt * d_b
                    for a in range(3):
                        pos[a] += direction[a] * d_b
                    step_dir = 1 if direction[b_axis] > 0.0 else -1
                    new_i = vox[b_axis] + step_dir
                    pos[b_axis] = (vox[b_axis] + (1 if step_dir > 0 else 0)) * h
                    if new_i < 0 or new_i >= dims[b_axis]:
                        cos_i = fabs(direction[b_axis])
                        refl = _fresnel(nn[m], n_ext, cos_i)
                        if _rng(&state) < refl:
                            direction[b_axis] = -direction[b_axis]
                        else:
                            exit_side = 1 if step_dir > 0 else 0
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
                            cos_i = fabs(direction[b_axis])
                            refl = _fresnel(nn[m], nn[m2], cos_i)
                            if _rng(&state) < refl:
                                direction[b_axis] = -direction[b_axis]
                                continue
                            ratio = nn[m] / nn[m2]
                            sin_t2 = ratio * ratio * (1.0 - cos_i * cos_i)
                            cos_t = sqrt(max(0.0, 1.0 - sin_t2))
                            nx_ = direction[0] * ratio
                            ny_ = direction[1] * ratio
                            nz_ = direction[2] * ratio
                            if b_axis == 0:
                                nx_ = cos_t if direction[0] > 0.0 else -cos_t
                            elif b_axis == 1:
                                ny_ = cos_t if direction[1] > 0.0 else -cos_t
                            else:
                                nz_ = cos_t if direction[2] > 0.0 else -cos_t
                            norm = sqrt(nx_ * nx_ + ny_ * ny_ + nz_ * nz_)
                            direction[0] = nx_ / norm
                            direction[1] = ny_ / norm
                            direction[2] = nz_ / norm
                            vox[b_axis] = new_i
                        else:
                            vox[b_axis] = new_i
            absorbed_sum += local_abs

    return launched, absorbed_sum, reflected, transmitted, roulette_bal, nan_count
