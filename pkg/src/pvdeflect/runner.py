"""End-to-end pipeline: mesh, assemble, constrain once, then solve per robot position."""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import plate_fem
from .loading import belt_footprints, inner_belt_y, nodal_forces, self_weight_forces, sweep_positions
from .mesh import build_grid, clamp_node_set
from .model import REFERENCE_MAX_DEFLECTION_MM, REFERENCE_REL_TOLERANCE, SimulationConfig
from .plate_fem import DeflectionField, GlobalSystem


@dataclass(frozen=True, eq=False)
class PositionResult:
    index: int
    center_x: float
    center_y: float
    belt_force_n: float
    field: DeflectionField

    def summary(self) -> dict:
        w, x, y = self.field.max_abs_w()
        return {"index": self.index, "center_x_mm": self.center_x, "center_y_mm": self.center_y,
                "total_force_n": self.belt_force_n, "max_abs_w_mm": w,
                "max_x_mm": x, "max_y_mm": y}


class Simulation:
    """Holds the constrained system for one configuration; every solve reuses its factorization."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.panel = config.panel
        self.robot = config.robot
        self.mesh = build_grid(self.panel, config.mesh.target_size_mm)
        self._solve_lock = threading.Lock()

    @cached_property
    def clamp_nodes(self) -> np.ndarray:
        return clamp_node_set(self.mesh, self.panel.clamp_pads)

    @cached_property
    def system(self) -> GlobalSystem:
        p = self.panel
        full = plate_fem.assemble(self.mesh, p.glass, p.glass_thickness_mm,
                                  p.frame_section, p.frame_material)
        return plate_fem.apply_constraints(full, self.clamp_nodes, self.config.solver.clamp_mode)

    @cached_property
    def base_load(self) -> np.ndarray:
        if not self.panel.include_self_weight:
            return np.zeros(self.mesh.n_dofs)
        return self_weight_forces(self.mesh, self.panel, self.robot.gravity_m_s2,
                                  self.robot.incline_deg)

    def positions(self) -> list[tuple[float, float]]:
        return sweep_positions(self.config.scenario, self.panel, self.robot)

    def load_vector(self, x: float, y: float) -> tuple[np.ndarray, float]:
        prints, force = belt_footprints(self.robot, self.panel, x, y)
        return self.base_load + nodal_forces(self.mesh, prints), force

    def solve_at(self, x: float, y: float, index: int = 0) -> PositionResult:
        f, force = self.load_vector(x, y)
        method = self.config.solver.method
        system = self.system.with_load(f)
        if method == "direct":
            # the shared factorization is built before any worker thread starts
            plate_fem.factorize(system)
            with self._solve_lock:
                fld = plate_fem.solve(system, method, config_digest=self.config.digest())
        else:
            fld = plate_fem.solve(system, method, config_digest=self.config.digest())
        return PositionResult(index, float(x), float(y), float(force), fld)

    def sweep(self, threads: int = 1, positions=None) -> list[PositionResult]:
        positions = self.positions() if positions is None else positions
        if self.config.solver.method == "direct":
            plate_fem.factorize(self.system)
        jobs = [(i, x, y) for i, (x, y) in enumerate(positions)]
        if threads <= 1 or len(jobs) == 1:
            results = [self.solve_at(x, y, i) for i, x, y in jobs]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda job: self.solve_at(job[1], job[2], job[0]), jobs))
        return sorted(results, key=lambda r: r.index)

    def inner_belt_line(self, center_y: float) -> float:
        return inner_belt_y(self.robot, self.panel, center_y)


def worst(results: list[PositionResult]) -> PositionResult:
    """Position with the largest peak deflection; the earliest index wins ties."""
    return max(results, key=lambda r: (r.field.max_abs_w()[0], -r.index))


def reference_band(kind: str, observed_mm: float) -> dict | None:
    target = REFERENCE_MAX_DEFLECTION_MM.get(kind)
    if target is None:
        return None
    lo, hi = target * (1 - REFERENCE_REL_TOLERANCE), target * (1 + REFERENCE_REL_TOLERANCE)
    return {"scenario": kind, "target_mm": target, "rel_tolerance": REFERENCE_REL_TOLERANCE,
            "lower_mm": lo, "upper_mm": hi, "observed_mm": observed_mm,
            "within_band": bool(lo <= observed_mm <= hi)}
