"""Compare the compiled transport kernel against the pure-Python fallback.

Runs the same photon batch through both backends, checks that the tallies
agree bit-for-bit, and reports throughput.

Usage: python benchmarks/bench_mc.py [n_photons]
"""

import sys
import time

import numpy as np

from tpbm.materials import Material, TissueOpticalProps, TissueThermalProps
from tpbm.mc import backend
from tpbm.mc import _pykernel
from tpbm.mc.engine import McConfig, run_mc
from tpbm.phantom import build_layered_phantom
from tpbm.sources import SourcePatch


def make_case():
    opt = TissueOpticalProps(mu_a=0.16, mu_s=7.0, g=0.89, n=1.4)
    thermal = TissueThermalProps(k=0.5, rho=1000.0, cp=4000.0)
    mats = {"tissue": Material("tissue", opt, thermal)}
    ph = build_layered_phantom([("tissue", 20.0)], 20.0, 1.0, mats)
    patch = SourcePatch(center=(10.0, 10.0), shape=("disc", 4.0),
                        irradiance_total=100.0, light_fraction=0.35,
                        heat_fraction=0.65)
    return ph, [patch]


def run_with(kernel, ph, sources, n):
    import tpbm.mc.engine as engine

    orig = engine.backend.run_photons
    engine.backend.run_photons = kernel
    try:
        t0 = time.perf_counter()
        field, tallies = run_mc(ph, sources, McConfig(n_photons=n, seed=42))
        elapsed = time.perf_counter() - t0
    finally:
        engine.backend.run_photons = orig
    return field, tallies, elapsed


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
    ph, sources = make_case()

    if not backend.COMPILED:
        print("compiled kernel not available; benchmarking the fallback only")
        _, tallies, t = run_with(_pykernel.run_photons, ph, sources, n)
        print(f"python   {n} photons in {t:8.2f} s  ({n / t:10.0f} photons/s)")
        return

    f_c, t_c, time_c = run_with(backend.run_photons, ph, sources, n)
    f_p, t_p, time_p = run_with(_pykernel.run_photons, ph, sources, n)

    match = t_c == t_p and np.array_equal(f_c.values, f_p.values)
    print(f"compiled {n} photons in {time_c:8.2f} s  ({n / time_c:10.0f} photons/s)")
    print(f"python   {n} photons in {time_p:8.2f} s  ({n / time_p:10.0f} photons/s)")
    print(f"speedup  {time_p / time_c:8.1f} x")
    print(f"tallies and fluence identical: {match}")
    if not match:
        sys.exit(1)


if __name__ == "__main__":
    main()
