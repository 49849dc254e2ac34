"""Transport kernel selection: compiled core with pure-Python fallback."""

from __future__ import annotations

try:
    from . import _kernel

    run_photons = _kernel.run_photons
    COMPILED = True
except ImportError:  # extension not built; fall back to the slow reference
    from . import _pykernel

    run_photons = _pykernel.run_photons
    COMPILED = False


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
