"""Voxel-based coupled light-transport and tissue-heating simulator."""

from .materials import (
    DEFAULT_BLOOD,
    DEFAULT_MATERIALS,
    BloodProps,
    Material,
    TissueOpticalProps,
    TissueThermalProps,
)
from .phantom import VoxelPhantom, build_layered_phantom, build_shell_phantom
from .fields import ScalarField
from .sources import SourcePatch
from .diffusion import OpticalBoundarySpec, solve_fluence_cw
from .bioheat import (
    InitialTemps,
    ThermalBoundarySpec,
    assemble_heat_sources,
    solve_pennes_steady,
    solve_pennes_transient,
)
from .mc import McConfig, run_mc
from .dosimetry import (
    CutlineSpec,
    RunReport,
    SweepSpec,
    extract_cutline,
    penetration_depth,
    run_coupled,
    run_sweep,
)
from .config import SimConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "BloodProps",
    "CutlineSpec",
    "DEFAULT_BLOOD",
    "DEFAULT_MATERIALS",
    "InitialTemps",
    "Material",
    "McConfig",
    "OpticalBoundarySpec",
    "RunReport",
    "ScalarField",
    "SimConfig",
    "SourcePatch",
    "SweepSpec",
    "ThermalBoundarySpec",
    "TissueOpticalProps",
    "TissueThermalProps",
    "VoxelPhantom",
    "assemble_heat_sources",
    "build_layered_phantom",
    "build_shell_phantom",
    "extract_cutline",
    "parse_config",
    "penetration_depth",
    "run_coupled",
    "run_mc",
    "run_sweep",
    "solve_fluence_cw",
    "solve_pennes_steady",
    "solve_pennes_transient",
]
