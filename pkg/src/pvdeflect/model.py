"""Physical parameters, configuration schema and derived mechanical quantities.

Units: geometry in millimetres, forces in newtons, elastic moduli in pascals
in the configuration (converted to N/mm^2 inside the solver), deflections in
millimetres.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import tomlkit

STANDARD_GRAVITY = 9.80665

# Expected peak deflection magnitudes (mm) for the two trajectory kinds,
# used by the run-report band check.
REFERENCE_MAX_DEFLECTION_MM = {"side_linear": 11.3, "central_linear": 10.4}
REFERENCE_REL_TOLERANCE = 0.25


class ConfigError(ValueError):
    """Configuration document is malformed or violates a model invariant."""


def _require(cond: bool, rule: str) -> None:
    if not cond:
        raise ConfigError(f"invariant violated: {rule}")


@dataclass(frozen=True)
class MaterialProps:
    youngs_modulus_pa: float
    poisson_ratio: float
    mass_density_kg_m3: float

    def __post_init__(self):
        _require(self.youngs_modulus_pa > 0, "youngs_modulus_pa > 0")
        _require(self.mass_density_kg_m3 > 0, "mass_density_kg_m3 > 0")
        _require(0 <= self.poisson_ratio < 0.5, "0 <= poisson_ratio < 0.5")

    @property
    def shear_modulus_pa(self) -> float:
        return self.youngs_modulus_pa / (2.0 * (1.0 + self.poisson_ratio))


TEMPERED_GLASS = MaterialProps(73e9, 0.23, 2500.0)
ALUMINIUM_6063_T5 = MaterialProps(70e9, 0.3, 2700.0)


@dataclass(frozen=True)
class FrameSection:
    """Perimeter frame cross-section constants (mm^2, mm^4)."""

    area_mm2: float = 180.0
    bending_inertia_mm4: float = 3.5e4
    torsion_constant_mm4: float = 1.0e4

    def __post_init__(self):
        _require(self.area_mm2 > 0, "frame_section.area_mm2 > 0")
        _require(self.bending_inertia_mm4 > 0, "frame_section.bending_inertia_mm4 > 0")
        _require(self.torsion_constant_mm4 > 0, "frame_section.torsion_constant_mm4 > 0")


CLAMP_EDGES = ("long_near", "long_far")


@dataclass(frozen=True)
class ClampPad:
    """Fixed-support pad on a long edge. ``long_near`` is y = 0, ``long_far`` is y = width."""

    edge: str
    center_offset_from_short_edge_mm: float
    pad_width_mm: float = 40.0

    def __post_init__(self):
        _require(self.edge in CLAMP_EDGES, f"clamp edge in {CLAMP_EDGES}")
        _require(self.center_offset_from_short_edge_mm > 0, "center_offset_from_short_edge_mm > 0")
        _require(self.pad_width_mm > 0, "pad_width_mm > 0")

    def interval(self) -> tuple[float, float]:
        half = 0.5 * self.pad_width_mm
        c = self.center_offset_from_short_edge_mm
        return c - half, c + half


def default_clamp_pads(length_mm: float = 1956.0, offset_mm: float = 200.0,
                       pad_width_mm: float = 40.0) -> tuple[ClampPad, ...]:
    return tuple(
        ClampPad(edge, x, pad_width_mm)
        for edge in CLAMP_EDGES
        for x in (offset_mm, length_mm - offset_mm)
    )


@dataclass(frozen=True)
class PanelModel:
    length_mm: float = 1956.0
    width_mm: float = 992.0
    glass_thickness_mm: float = 3.5
    frame_depth_mm: float = 40.0
    frame_section: FrameSection = field(default_factory=FrameSection)
    # None -> two pads per long edge, 200 mm from each short edge
    clamp_pads: tuple[ClampPad, ...] | None = None
    glass: MaterialProps = TEMPERED_GLASS
    frame_material: MaterialProps = ALUMINIUM_6063_T5
    include_self_weight: bool = False

    def __post_init__(self):
        if self.clamp_pads is None:
            object.__setattr__(self, "clamp_pads", default_clamp_pads(self.length_mm))
        _require(self.length_mm > self.width_mm > 0, "length_mm > width_mm > 0")
        _require(self.glass_thickness_mm > 0, "glass_thickness_mm > 0")
        _require(self.frame_depth_mm > 0, "frame_depth_mm > 0")
        for pad in self.clamp_pads:
            lo, hi = pad.interval()
            _require(lo >= 0 and hi <= self.length_mm,
                     "clamp pad footprint lies on the panel perimeter")


@dataclass(frozen=True)
class RobotLoad:
    mass_kg: float = 83.0
    incline_deg: float = 10.0
    belt_contact_length_mm: float = 590.0
    belt_spacing_mm: float = 673.0
    belt_width_mm: float = 50.0
    gravity_m_s2: float = STANDARD_GRAVITY
    # Pins the surface force directly (kgf) instead of deriving it from mass and incline.
    normal_force_override_kgf: float | None = None

    def __post_init__(self):
        _require(self.mass_kg >= 0, "mass_kg >= 0")
        _require(0 <= self.incline_deg < 90, "0 <= incline_deg < 90")
        _require(self.belt_contact_length_mm > 0, "belt_contact_length_mm > 0")
        _require(self.belt_width_mm > 0, "belt_width_mm > 0")
        _require(self.belt_spacing_mm >= self.belt_width_mm,
                 "belt_spacing_mm >= belt_width_mm (belts do not overlap)")
        _require(self.gravity_m_s2 > 0, "gravity_m_s2 > 0")
        if self.normal_force_override_kgf is not None:
            _require(self.normal_force_override_kgf >= 0, "normal_force_override_kgf >= 0")

    @property
    def normal_force_n(self) -> float:
        if self.normal_force_override_kgf is not None:
            return self.normal_force_override_kgf * self.gravity_m_s2
        return normal_force(self.mass_kg, self.incline_deg, self.gravity_m_s2)


SCENARIO_KINDS = ("central_linear", "side_linear", "single_position")


@dataclass(frozen=True)
class Scenario:
    """Robot trajectory.

    Sweeps place the robot at ``start_mm + i * step_mm`` along the panel length.
    ``single_position`` uses ``positions_mm`` verbatim as (x, y) centre pairs.
    """

    kind: str = "side_linear"
    start_mm: float = 295.0
    step_mm: float = 120.0
    count: int = 10
    lateral_offset_mm: float = 0.0
    positions_mm: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        _require(self.kind in SCENARIO_KINDS, f"scenario kind in {SCENARIO_KINDS}")
        if self.kind == "single_position":
            _require(len(self.positions_mm) >= 1, "single_position needs >= 1 position")
        else:
            _require(self.count >= 1, "count >= 1")
            _require(self.step_mm > 0, "step_mm > 0")
        _require(self.lateral_offset_mm >= 0, "lateral_offset_mm >= 0")


@dataclass(frozen=True)
class MeshSettings:
    target_size_mm: float = 10.0


@dataclass(frozen=True)
class SolverSettings:
    clamp_mode: str = "fix_all"
    method: str = "direct"

    def __post_init__(self):
        _require(self.clamp_mode in ("fix_all", "pin_w"), "clamp_mode in (fix_all, pin_w)")
        _require(self.method in ("direct", "cg"), "method in (direct, cg)")


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "."
    profile_step_mm: float = 10.0
    field_format: str = "csv_grid"
    fit_window_mm: tuple[float, float] | None = None

    def __post_init__(self):
        _require(self.profile_step_mm > 0, "profile_step_mm > 0")
        _require(self.field_format in ("csv_grid", "vtk_legacy"),
                 "field_format in (csv_grid, vtk_legacy)")
        if self.fit_window_mm is not None:
            _require(len(self.fit_window_mm) == 2
                     and self.fit_window_mm[0] < self.fit_window_mm[1],
                     "fit_window_mm = [lo, hi] with lo < hi")


@dataclass(frozen=True)
class SimulationConfig:
    panel: PanelModel = field(default_factory=PanelModel)
    robot: RobotLoad = field(default_factory=RobotLoad)
    mesh: MeshSettings = field(default_factory=MeshSettings)
    scenario: Scenario = field(default_factory=Scenario)
    solver: SolverSettings = field(default_factory=SolverSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def __post_init__(self):
        r, p = self.robot, self.panel
        h = self.mesh.target_size_mm
        _require(h > 0, "mesh.target_size_mm > 0")
        _require(h <= min(r.belt_contact_length_mm, r.belt_width_mm),
                 "mesh.target_size_mm <= min(belt dimensions)")
        _require(r.belt_spacing_mm + r.belt_width_mm <= p.width_mm,
                 "belt_spacing_mm + belt_width_mm <= panel width")

    @property
    def mesh_target_size_mm(self) -> float:
        return self.mesh.target_size_mm

    def grid_cells(self) -> tuple[int, int]:
        h = self.mesh.target_size_mm
        return math.ceil(self.panel.length_mm / h), math.ceil(self.panel.width_mm / h)

    def to_dict(self) -> dict[str, Any]:
        return _strip_none(dataclasses.asdict(self))

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def normal_force(mass_kg: float, incline_deg: float, gravity_m_s2: float = STANDARD_GRAVITY) -> float:
    """Weight component normal to a panel tilted by ``incline_deg`` (N)."""
    # cos(90 deg) is 6e-17 in floating point; a vertical surface carries nothing
    if incline_deg >= 90.0:
        return 0.0
    return mass_kg * gravity_m_s2 * math.cos(math.radians(incline_deg))


def flexural_rigidity(youngs_modulus: float, thickness: float, poisson_ratio: float) -> float:
    """Plate bending stiffness E t^3 / (12 (1 - nu^2)); units follow the inputs (Pa, m -> N m)."""
    return youngs_modulus * thickness ** 3 / (12.0 * (1.0 - poisson_ratio ** 2))


# --------------------------------------------------------------------------
# configuration documents

def _strip_none(obj):
    if isinstance(obj, dict):
        return {k: _strip_none(v) for k, v in obj.items() if v is not None}
    if isinstance(obj, (list, tuple)):
        return [_strip_none(v) for v in obj]
    return obj


def _build(cls, data: Any, path: str, base=None):
    """Instantiate a (nested) frozen dataclass from a plain mapping, rejecting unknown keys.

    Keys absent from ``data`` keep the values of ``base`` (or the class defaults).
    """
    if not isinstance(data, Mapping):
        raise ConfigError(f"schema violation at '{path}': expected a table")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    for key in data:
        if key not in fields:
            raise ConfigError(f"schema violation: unknown key '{path}.{key}'" if path
                              else f"schema violation: unknown key '{key}'")
    kwargs = {}
    for name, value in data.items():
        key = f"{path}.{name}" if path else name
        kwargs[name] = _coerce(cls, name, value, key, base)
    if cls is PanelModel and "clamp_pads" not in data:
        kwargs["clamp_pads"] = None  # re-derive pads for the (possibly new) length
    try:
        return cls(**kwargs) if base is None else dataclasses.replace(base, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"schema violation at '{path}': {exc}") from exc


_NESTED = {
    "panel": PanelModel, "robot": RobotLoad, "mesh": MeshSettings, "scenario": Scenario,
    "solver": SolverSettings, "output": OutputSettings, "frame_section": FrameSection,
    "glass": MaterialProps, "frame_material": MaterialProps,
}


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"schema violation: '{key}' must be a number, got {value!r}")
    return float(value)


def _coerce(cls, name: str, value: Any, key: str, base=None):
    if name in _NESTED and cls in (SimulationConfig, PanelModel):
        nested_base = getattr(base, name) if base is not None else getattr(cls(), name)
        return _build(_NESTED[name], value, key, nested_base)
    if name == "clamp_pads":
        if not isinstance(value, list):
            raise ConfigError(f"schema violation: '{key}' must be an array of tables")
        return tuple(_build(ClampPad, v, f"{key}[{i}]") for i, v in enumerate(value))
    if name == "positions_mm":
        try:
            return tuple((_number(p[0], key), _number(p[1], key)) for p in value)
        except (TypeError, IndexError, KeyError):
            raise ConfigError(f"schema violation: '{key}' must be a list of [x, y] pairs") from None
    if name == "fit_window_mm":
        if not isinstance(value, list) or len(value) != 2:
            raise ConfigError(f"schema violation: '{key}' must be [lo, hi]")
        return (_number(value[0], key), _number(value[1], key))
    if name == "count":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"schema violation: '{key}' must be an integer")
        return value
    if name == "include_self_weight":
        if not isinstance(value, bool):
            raise ConfigError(f"schema violation: '{key}' must be a boolean")
        return value
    if name in ("edge", "kind", "clamp_mode", "method", "directory", "field_format"):
        if not isinstance(value, str):
            raise ConfigError(f"schema violation: '{key}' must be a string")
        return value
    return _number(value, key)


def config_from_dict(data: Mapping[str, Any]) -> SimulationConfig:
    return _build(SimulationConfig, data, "")


def load_config(document: str | Path | Mapping[str, Any] | None = None) -> SimulationConfig:
    """Resolve a configuration from a TOML path, TOML text, a mapping, or nothing (defaults)."""
    if document is None:
        return SimulationConfig()
    if isinstance(document, Mapping):
        return config_from_dict(document)
    if isinstance(document, Path) or (isinstance(document, str) and "\n" not in document
                                      and document.endswith(".toml")):
        text = Path(document).read_text()
    else:
        text = document
    try:
        data = tomlkit.parse(text).unwrap()
    except tomlkit.exceptions.TOMLKitError as exc:
        raise ConfigError(f"schema violation: not valid TOML ({exc})") from exc
    return config_from_dict(data)


def dump_config(config: SimulationConfig) -> str:
    return tomlkit.dumps(config.to_dict())
