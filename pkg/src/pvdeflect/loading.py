"""Robot belt footprints, consistent nodal loads and trajectory sweeps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import DOF_PER_NODE, PlateMesh
from .model import PanelModel, RobotLoad, Scenario
from .plate_fem import pressure_load_vectors


class DegenerateSweepError(ValueError):
    pass


@dataclass(frozen=True)
class Footprint:
    """Clipped contact rectangle in panel coordinates (mm) carrying ``pressure`` (N/mm^2)."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    pressure: float

    @property
    def empty(self) -> bool:
        return not (self.x_max > self.x_min and self.y_max > self.y_min)

    @property
    def area(self) -> float:
        return 0.0 if self.empty else (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def force(self) -> float:
        return self.pressure * self.area


def _clip(lo, hi, extent):
    return max(lo, 0.0), min(hi, extent)


def belt_centerlines(robot: RobotLoad, center_y: float) -> tuple[float, float]:
    half = 0.5 * robot.belt_spacing_mm
    return center_y - half, center_y + half


def inner_belt_y(robot: RobotLoad, panel: PanelModel, center_y: float) -> float:
    """Belt centerline nearest the panel's long centerline (lower y on ties)."""
    ys = belt_centerlines(robot, center_y)
    mid = 0.5 * panel.width_mm
    return min(ys, key=lambda y: (abs(y - mid), y))


def belt_footprints(robot: RobotLoad, panel: PanelModel, center_x: float,
                    center_y: float) -> tuple[tuple[Footprint, Footprint], float]:
    """Both belt contact patches clipped to the panel, and the total force they carry (N).

    Pressure is fixed by the nominal (unclipped) contact area, so a partially
    off-panel robot transmits proportionally less force.
    """
    L, B = robot.belt_contact_length_mm, robot.belt_width_mm
    pressure = robot.normal_force_n / (2.0 * L * B)
    x0, x1 = _clip(center_x - 0.5 * L, center_x + 0.5 * L, panel.length_mm)
    prints = []
    for yc in belt_centerlines(robot, center_y):
        y0, y1 = _clip(yc - 0.5 * B, yc + 0.5 * B, panel.width_mm)
        prints.append(Footprint(x0, x1, y0, y1, pressure))
    return (prints[0], prints[1]), sum(p.force for p in prints)


def _overlap(grid_lo, h, n, lo, hi):
    """Cell range and per-cell normalized sub-interval covered by [lo, hi]."""
    first = max(int(np.floor((lo - grid_lo) / h)), 0)
    last = min(int(np.ceil((hi - grid_lo) / h)), n)
    cells = np.arange(first, last)
    a = np.clip((lo - grid_lo) / h - cells, 0.0, 1.0)
    b = np.clip((hi - grid_lo) / h - cells, 0.0, 1.0)
    keep = b > a
    return cells[keep], a[keep], b[keep]


def nodal_forces(mesh: PlateMesh, footprints) -> np.ndarray:
    """Consistent nodal load vector for uniform pressure over each footprint.

    Each element receives the exact integral of the pressure over its
    intersection with the footprint against its shape functions.
    """
    f = np.zeros(mesh.n_dofs)
    for fp in footprints:
        if fp.empty or fp.pressure == 0.0:
            continue
        ci, s1, s2 = _overlap(0.0, mesh.dx, mesh.nx, fp.x_min, fp.x_max)
        cj, t1, t2 = _overlap(0.0, mesh.dy, mesh.ny, fp.y_min, fp.y_max)
        if ci.size == 0 or cj.size == 0:
            continue
        I, J = np.meshgrid(np.arange(ci.size), np.arange(cj.size), indexing="ij")
        I, J = I.ravel(), J.ravel()
        fe = fp.pressure * pressure_load_vectors(mesh.dx, mesh.dy, s1[I], s2[I], t1[J], t2[J])
        elems = cj[J] * mesh.nx + ci[I]
        np.add.at(f, mesh.element_dofs[elems].ravel(), fe.ravel())
    return f


def self_weight_forces(mesh: PlateMesh, panel: PanelModel, gravity_m_s2: float,
                       incline_deg: float = 0.0) -> np.ndarray:
    """Glass weight as uniform pressure plus frame weight as line load on the perimeter beams."""
    cos = np.cos(np.radians(incline_deg))
    # rho [kg/m^3] * g [m/s^2] * t [mm] * 1e-9 -> N/mm^2
    q_glass = panel.glass.mass_density_kg_m3 * gravity_m_s2 * panel.glass_thickness_mm * 1e-9 * cos
    full = Footprint(0.0, panel.length_mm, 0.0, panel.width_mm, q_glass)
    f = nodal_forces(mesh, [full])
    q_frame = panel.frame_material.mass_density_kg_m3 * gravity_m_s2 * \
        panel.frame_section.area_mm2 * 1e-9 * cos  # N/mm
    edges = mesh.perimeter_edges
    lengths = np.r_[np.full(2 * mesh.nx, mesh.dx), np.full(2 * mesh.ny, mesh.dy)]
    for k, (a, b) in enumerate(edges):
        L = lengths[k]
        f[DOF_PER_NODE * a] += 0.5 * q_frame * L
        f[DOF_PER_NODE * b] += 0.5 * q_frame * L
        m = q_frame * L * L / 12.0
        if k < 2 * mesh.nx:
            # slope dw/dx = -theta_y
            f[DOF_PER_NODE * a + 2] -= m
            f[DOF_PER_NODE * b + 2] += m
        else:
            f[DOF_PER_NODE * a + 1] += m
            f[DOF_PER_NODE * b + 1] -= m
    return f


def sweep_positions(scenario: Scenario, panel: PanelModel, robot: RobotLoad) -> list[tuple[float, float]]:
    """Ordered robot centre positions (x, y) in mm for the scenario."""
    if scenario.kind == "single_position":
        positions = [tuple(map(float, p)) for p in scenario.positions_mm]
    else:
        if scenario.kind == "central_linear":
            y = 0.5 * panel.width_mm
        else:
            # outer belt edge sits lateral_offset from the y = 0 long edge
            y = scenario.lateral_offset_mm + 0.5 * robot.belt_width_mm + 0.5 * robot.belt_spacing_mm
        positions = [(scenario.start_mm + i * scenario.step_mm, y) for i in range(scenario.count)]
    half_l = 0.5 * robot.belt_contact_length_mm
    if all(x + half_l <= 0 or x - half_l >= panel.length_mm for x, _ in positions):
        raise DegenerateSweepError("every sweep position puts the robot entirely off the panel")
    return positions
