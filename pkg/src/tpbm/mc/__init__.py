from .backend import COMPILED, backend_name
from .engine import McConfig, Tallies, compare_mc_diffusion, run_mc
from .samplers import fresnel_reflectance, sample_hg_cosine, sample_step

__all__ = [
    "COMPILED",
    "backend_name",
    "McConfig",
    "Tallies",
    "run_mc",
    "compare_mc_diffusion",
    "sample_step",
    "sample_hg_cosine",
    "fresnel_reflectance",
]
