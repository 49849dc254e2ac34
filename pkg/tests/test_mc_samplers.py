import math

import numpy as np
import pytest

from tpbm.mc.samplers import (
    fresnel_reflectance,
    next_uniform,
    photon_stream_state,
    sample_hg_cosine,
    sample_step,
)


def test_step_sampling():
    assert sample_step(2.0, math.exp(-1.0)) == pytest.approx(0.5)
    assert sample_step(1.0, 1.0) == 0.0


def test_step_mean_matches_mfp():
    state = photon_stream_state(7, 0)
    total = 0.0
    n = 50_000
    for _ in range(n):
        u, state = next_uniform(state)
        total += sample_step(2.0, u)
    assert total / n == pytest.approx(0.5, rel=0.02)


def test_hg_cosine_range():
    g = 0.89
    for u in np.linspace(1e-9, 1.0, 1001):
        c = sample_hg_cosine(g, float(u))
        assert -1.0 <= c <= 1.0


def test_hg_isotropic_limit():
    # g = 0 reduces to uniform cosine
    us = np.linspace(0.005, 0.995, 199)
    cs = np.array([sample_hg_cosine(0.0, float(u)) for u in us])
    assert cs.min() < -0.98 and cs.max() > 0.98
    assert abs(cs.mean()) < 0.01


def test_hg_mean_cosine():
    g = 0.89
    state = photon_stream_state(1, 0)
    total = 0.0
    n = 100_000
    for _ in range(n):
        u, state = next_uniform(state)
        total += sample_hg_cosine(g, u)
    assert total / n == pytest.approx(g, abs=0.005)


def test_fresnel_normal_incidence():
    r = fresnel_reflectance(1.0, 1.4, 1.0)
    assert r == pytest.approx(((0.4) / (2.4)) ** 2, rel=1e-12)


def test_fresnel_matched_index():
    assert fresnel_reflectance(1.4, 1.4, 0.3) == 0.0


def test_fresnel_total_internal_reflection():
    # beyond the critical angle going n=1.4 -> 1.0
    cos_crit = math.sqrt(1.0 - (1.0 / 1.4) ** 2)
    assert fresnel_reflectance(1.4, 1.0, cos_crit * 0.5) == 1.0


def test_fresnel_grazing():
    assert fresnel_reflectance(1.0, 1.4, 1e-9) == pytest.approx(1.0, abs=1e-4)


def test_rng_streams_deterministic_and_distinct():
    s0 = photon_stream_state(42, 0)
    assert photon_stream_state(42, 0) == s0
    assert photon_stream_state(42, 1) != s0
    assert photon_stream_state(43, 0) != s0


def test_uniform_in_unit_interval():
    state = photon_stream_state(3, 5)
    vals = []
    for _ in range(10_000):
        u, state = next_uniform(state)
        vals.append(u)
    vals = np.array(vals)
    assert (vals > 0.0).all() and (vals <= 1.0).all()
    assert vals.mean() == pytest.approx(0.5, abs=0.02)
