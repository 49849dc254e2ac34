"""Config-file parsing into a validated SimConfig.

The config is YAML with a fixed key schema; every key carries its unit in
the name (``*_mm``, ``*_per_cm``, ``*_mw_cm2`` and so on) and conversion
to internal units happens here, once, at parse time.  Strict mode rejects
unknown keys; lenient mode collects them as warnings.  Diagnostics are
anchored to the dotted key path rather than line numbers, since mapping
keys survive reformatting while line numbers do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from pathlib import Path

import yaml

from .materials import (
    BloodProps,
    Material,
    MaterialError,
    TissueOpticalProps,
    TissueThermalProps,
)
from .phantom import PhantomError, VoxelPhantom, build_layered_phantom, build_shell_phantom
from .sources import FACES, SourceError, SourcePatch

DIFFUSION = "diffusion"
MONTE_CARLO = "mc"
BOTH = "both"


class ConfigError(ValueError):
    """Invalid config content; message names the offending key path."""


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


class _Section:
    """A mapping view that tracks which keys were consumed."""

    def __init__(self, data, path: str, warnings: list[str], strict: bool):
        if not isinstance(data, dict):
            _fail(path or "<root>", f"expected a mapping, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.warnings = warnings
        self.strict = strict
        self._seen = set()

    def _sub(self, key):
        return f"{self.path}.{key}" if self.path else str(key)

    def has(self, key):
        return key in self.data

    def get(self, key, default=None, required=False):
        if key not in self.data:
            if required:
                _fail(self._sub(key), "missing required key")
            return default
        self._seen.add(key)
        return self.data[key]

    def section(self, key, required=False):
        val = self.get(key, required=required)
        if val is None:
            return None
        return _Section(val, self._sub(key), self.warnings, self.strict)

    def number(self, key, default=None, required=False, minimum=None, maximum=None,
               exclusive_min=None):
        val = self.get(key, default, required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            _fail(self._sub(key), f"expected a number, got {val!r}")
        val = float(val)
        if minimum is not None and val < minimum:
            _fail(self._sub(key), f"must be >= {minimum}, got {val}")
        if exclusive_min is not None and val <= exclusive_min:
            _fail(self._sub(key), f"must be > {exclusive_min}, got {val}")
        if maximum is not None and val > maximum:
            _fail(self._sub(key), f"must be <= {maximum}, got {val}")
        return val

    def integer(self, key, default=None, required=False, minimum=None):
        val = self.get(key, default, required)
        if val is None:
            return None
        if isinstance(val, bool) or not isinstance(val, int):
            _fail(self._sub(key), f"expected an integer, got {val!r}")
        if minimum is not None and val < minimum:
            _fail(self._sub(key), f"must be >= {minimum}, got {val}")
        return val

    def string(self, key, default=None, required=False, choices=None):
        val = self.get(key, default, required)
        if val is None:
            return None
        if not isinstance(val, str):
            _fail(self._sub(key), f"expected a string, got {val!r}")
        if choices and val not in choices:
            _fail(self._sub(key), f"must be one of {sorted(choices)}, got {val!r}")
        return val

    def boolean(self, key, default=None, required=False):
        val = self.get(key, default, required)
        if val is None:
            return None
        if not isinstance(val, bool):
            _fail(self._sub(key), f"expected true/false, got {val!r}")
        return val

    def listing(self, key, required=False):
        val = self.get(key, required=required)
        if val is None:
            return None
        if not isinstance(val, list):
            _fail(self._sub(key), f"expected a list, got {type(val).__name__}")
        return val

    def finish(self):
        extra = set(self.data) - self._seen
        for key in sorted(extra):
            msg = f"{self._sub(key)}: unknown key"
            if self.strict:
                raise ConfigError(msg)
            self.warnings.append(msg)


@dataclass
class PhantomSpec:
    geometry: str
    spacing_mm: float
    lateral_extent_mm: float
    layers: list[tuple[str, float]]
    curvature_radius_mm: float | None = None


@dataclass
class OpticsSpec:
    solver: str = DIFFUSION
    boundary_mode: str = "robin-partial-current"
    tolerance: float = 1e-8
    photons: int = 100_000
    seed: int = 20240810
    batches: int = 64
    workers: int = 1


@dataclass
class TransientSpec:
    enabled: bool = False
    dt_s: float = 0.5
    t_end_s: float = 1200.0
    # "initial-temps" starts from thermal.initial_temps_c; "equilibrium"
    # starts from the source-free steady state, isolating the source effect
    start_from: str = "initial-temps"
    probes_mm: dict[str, tuple[float, float, float]] = dc_field(default_factory=dict)


@dataclass
class ThermalSpec:
    h_mw_cm2c: float = 0.5
    T_inf_c: float = 25.0
    initial_temps_c: dict[str, float] = dc_field(default_factory=dict)
    heating_mode: str = "paper-replication"
    tolerance: float = 1e-8
    transient: TransientSpec = dc_field(default_factory=TransientSpec)


@dataclass
class CutlineConfig:
    name: str
    quantity: str  # fluence | temperature
    start_mm: tuple[float, float, float]
    end_mm: tuple[float, float, float]
    samples: int


@dataclass
class OutputSpec:
    directory: str = "runs/out"
    cutlines: list[CutlineConfig] = dc_field(default_factory=list)
    dump_fields: list[str] = dc_field(default_factory=list)


@dataclass
class SimConfig:
    phantom: PhantomSpec
    materials: dict[str, Material]
    blood: BloodProps
    sources: list[SourcePatch]
    optics: OpticsSpec
    thermal: ThermalSpec
    output: OutputSpec
    warnings: list[str] = dc_field(default_factory=list)

    def build_phantom(self) -> VoxelPhantom:
        ph = self.phantom
        if ph.geometry == "shell":
            return build_shell_phantom(
                ph.layers, ph.lateral_extent_mm, ph.spacing_mm,
                ph.curvature_radius_mm, self.materials,
            )
        return build_layered_phantom(
            ph.layers, ph.lateral_extent_mm, ph.spacing_mm, self.materials
        )


def _parse_point(sec: _Section, key: str, n=3):
    val = sec.listing(key, required=True)
    if len(val) != n or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                for v in val):
        _fail(sec._sub(key), f"expected a list of {n} numbers, got {val!r}")
    return tuple(float(v) for v in val)


def _parse_materials(sec: _Section) -> dict[str, Material]:
    materials = {}
    for name in list(sec.data):
        msec = sec.section(name, required=True)
        osec = msec.section("optical", required=True)
        tsec = msec.section("thermal", required=True)
        try:
            optical = TissueOpticalProps(
                mu_a=osec.number("mu_a_per_cm", required=True),
                mu_s=osec.number("mu_s_per_cm", required=True),
                g=osec.number("g", required=True),
                n=osec.number("n", required=True),
                d_override=osec.number("d_cm"),
            )
            thermal = TissueThermalProps(
                k=tsec.number("k_w_mc", required=True),
                rho=tsec.number("rho_kg_m3", required=True),
                cp=tsec.number("cp_j_kgc", required=True),
                w_b=tsec.number("w_b_per_s", 0.0),
                q_met=tsec.number("q_met_w_m3", 0.0),
            )
        except MaterialError as e:
            _fail(msec.path, str(e))
        osec.finish()
        tsec.finish()
        msec.finish()
        materials[name] = Material(name, optical, thermal)
    sec.finish()
    return materials


def _parse_phantom(sec: _Section, materials) -> PhantomSpec:
    geometry = sec.string("geometry", "slab", choices=("slab", "shell"))
    spacing = sec.number("spacing_mm", required=True, exclusive_min=0.0)
    extent = sec.number("lateral_extent_mm", required=True, exclusive_min=0.0)
    raw_layers = sec.listing("layers", required=True)
    if not raw_layers:
        _fail(sec._sub("layers"), "at least one layer is required")
    layers = []
    for i, entry in enumerate(raw_layers):
        lsec = _Section(entry, f"{sec._sub('layers')}[{i}]", sec.warnings, sec.strict)
        mat = lsec.string("material", required=True)
        if mat not in materials:
            _fail(lsec._sub("material"), f"material {mat!r} is not defined")
        layers.append((mat, lsec.number("thickness_mm", required=True, exclusive_min=0.0)))
        lsec.finish()
    radius = sec.number("curvature_radius_mm", exclusive_min=0.0)
    if geometry == "shell" and radius is None:
        _fail(sec._sub("curvature_radius_mm"), "required for shell geometry")
    sec.finish()
    return PhantomSpec(geometry, spacing, extent, layers, radius)


def _parse_sources(sec: _Section, phantom: PhantomSpec) -> list[SourcePatch]:
    face = sec.string("face", "z-", choices=FACES)
    irr = sec.number("irradiance_mw_cm2", required=True, minimum=0.0)
    light = sec.number("light_fraction", required=True, minimum=0.0, maximum=1.0)
    heat = sec.number("heat_fraction", required=True, minimum=0.0, maximum=1.0)
    if abs(light + heat - 1.0) > 1e-9:
        _fail(sec.path, f"light_fraction + heat_fraction must equal 1, got {light + heat}")

    ssec = sec.section("shape", required=True)
    kind = ssec.string("type", required=True, choices=("disc", "rect"))
    if kind == "disc":
        shape = ("disc", ssec.number("radius_mm", required=True, exclusive_min=0.0))
    else:
        hw = ssec.number("half_width_mm", required=True, exclusive_min=0.0)
        hv = ssec.number("half_height_mm", hw, exclusive_min=0.0)
        shape = ("rect", hw, hv)
    ssec.finish()

    centers = []
    if sec.has("grid"):
        gsec = sec.section("grid")
        nx = gsec.integer("nu", required=True, minimum=1)
        ny = gsec.integer("nv", required=True, minimum=1)
        pitch = gsec.number("pitch_mm", required=True, exclusive_min=0.0)
        gsec.finish()
        # center the grid on the face
        cu = phantom.lateral_extent_mm / 2.0
        for i in range(nx):
            for j in range(ny):
                centers.append((cu + (i - (nx - 1) / 2.0) * pitch,
                                cu + (j - (ny - 1) / 2.0) * pitch))
    if sec.has("centers_mm"):
        for i, c in enumerate(sec.listing("centers_mm")):
            if not (isinstance(c, list) and len(c) == 2):
                _fail(f"{sec._sub('centers_mm')}[{i}]", f"expected [u, v], got {c!r}")
            centers.append((float(c[0]), float(c[1])))
    if not centers:
        _fail(sec.path, "need a grid section or centers_mm list")
    sec.finish()
    try:
        return [
            SourcePatch(center=c, shape=shape, face=face, irradiance_total=irr,
                        light_fraction=light, heat_fraction=heat)
            for c in centers
        ]
    except SourceError as e:
        _fail(sec.path, str(e))


def _parse_optics(sec: _Section | None) -> OpticsSpec:
    if sec is None:
        return OpticsSpec()
    spec = OpticsSpec(
        solver=sec.string("solver", DIFFUSION, choices=(DIFFUSION, MONTE_CARLO, BOTH)),
        boundary_mode=sec.string(
            "boundary", "robin-partial-current",
            choices=("robin-partial-current", "dirichlet-zero"),
        ),
        tolerance=sec.number("tolerance", 1e-8, exclusive_min=0.0),
        photons=sec.integer("photons", 100_000, minimum=1),
        seed=sec.integer("seed", 20240810, minimum=0),
        batches=sec.integer("batches", 64, minimum=1),
        workers=sec.integer("workers", 1, minimum=1),
    )
    sec.finish()
    return spec


def _parse_thermal(sec: _Section | None, materials) -> ThermalSpec:
    if sec is None:
        return ThermalSpec()
    spec = ThermalSpec(
        h_mw_cm2c=sec.number("h_mw_cm2c", 0.5, minimum=0.0),
        T_inf_c=sec.number("T_inf_c", 25.0),
        heating_mode=sec.string("heating_mode", "paper-replication",
                                choices=("paper-replication", "physical")),
        tolerance=sec.number("tolerance", 1e-8, exclusive_min=0.0),
    )
    isec = sec.section("initial_temps_c")
    if isec is not None:
        for name in list(isec.data):
            if name not in materials:
                _fail(isec._sub(name), f"material {name!r} is not defined")
            spec.initial_temps_c[name] = isec.number(name, required=True,
                                                     minimum=0.0, maximum=100.0)
        isec.finish()
    tsec = sec.section("transient")
    if tsec is not None:
        spec.transient = TransientSpec(
            enabled=tsec.boolean("enabled", True),
            dt_s=tsec.number("dt_s", 0.5, exclusive_min=0.0),
            t_end_s=tsec.number("t_end_s", 1200.0, exclusive_min=0.0),
            start_from=tsec.string("start_from", "initial-temps",
                                   choices=("initial-temps", "equilibrium")),
        )
        psec = tsec.section("probes_mm")
        if psec is not None:
            for name in list(psec.data):
                spec.transient.probes_mm[name] = _parse_point(psec, name)
            psec.finish()
        tsec.finish()
    sec.finish()
    return spec


def _parse_output(sec: _Section | None) -> OutputSpec:
    if sec is None:
        return OutputSpec()
    spec = OutputSpec(directory=sec.string("directory", "runs/out"))
    raw = sec.listing("cutlines")
    for i, entry in enumerate(raw or []):
        csec = _Section(entry, f"{sec._sub('cutlines')}[{i}]", sec.warnings, sec.strict)
        spec.cutlines.append(CutlineConfig(
            name=csec.string("name", required=True),
            quantity=csec.string("quantity", required=True,
                                 choices=("fluence", "temperature")),
            start_mm=_parse_point(csec, "start_mm"),
            end_mm=_parse_point(csec, "end_mm"),
            samples=csec.integer("samples", 200, minimum=2),
        ))
        csec.finish()
    fields = sec.listing("dump_fields")
    for i, f in enumerate(fields or []):
        if f not in ("fluence", "fluence_mc", "temperature", "temperature_final"):
            _fail(f"{sec._sub('dump_fields')}[{i}]", f"unknown field {f!r}")
        spec.dump_fields.append(f)
    sec.finish()
    return spec


def parse_config(path: str | Path, strict: bool = True) -> SimConfig:
    """Load and validate a simulation config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        # syntax errors are the one place line numbers are available and right
        raise ConfigError(f"{path}: malformed YAML: {e}") from None
    if data is None:
        raise ConfigError(f"{path}: empty config")

    warnings: list[str] = []
    root = _Section(data, "", warnings, strict)
    materials = _parse_materials(root.section("materials", required=True))
    phantom = _parse_phantom(root.section("phantom", required=True), materials)

    bsec = root.section("blood")
    if bsec is not None:
        try:
            blood = BloodProps(
                rho_b=bsec.number("rho_kg_m3", 1050.0),
                c_b=bsec.number("cp_j_kgc", 3600.0),
                T_b=bsec.number("T_b_c", 37.0),
            )
        except MaterialError as e:
            _fail(bsec.path, str(e))
        bsec.finish()
    else:
        blood = BloodProps()

    sources = _parse_sources(root.section("sources", required=True), phantom)
    optics = _parse_optics(root.section("optics"))
    thermal = _parse_thermal(root.section("thermal"), materials)
    output = _parse_output(root.section("output"))
    root.finish()

    cfg = SimConfig(phantom, materials, blood, sources, optics, thermal, output, warnings)
    try:
        cfg.build_phantom()  # geometry invariants (spacing divides extents, ...)
    except (PhantomError, MaterialError) as e:
        raise ConfigError(f"phantom: {e}") from None
    # patches must fit on their face; rasterize once to catch that here
    from .sources import patch_flux_maps

    try:
        patch_flux_maps(cfg.build_phantom(), sources, "light")
    except SourceError as e:
        raise ConfigError(f"sources: {e}") from None
    return cfg
