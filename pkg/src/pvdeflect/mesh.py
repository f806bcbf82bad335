"""Structured rectangular grid over the panel mid-plane and node-set queries."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .model import PanelModel

DOF_PER_NODE = 3  # w, theta_x, theta_y


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class LineSpec:
    """Axis-parallel line. ``axis="x"`` runs along x at ``y = offset_mm``; ``axis="y"`` runs along y at ``x = offset_mm``."""

    axis: str
    offset_mm: float

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise MeshError(f"line axis must be 'x' or 'y', got {self.axis!r}")

    @classmethod
    def parse(cls, text: str) -> "LineSpec":
        """Parse ``"y=496"`` (a line along x) or ``"x=978"`` (a line along y)."""
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in ("x", "y") or not value:
            raise MeshError(f"cannot parse line spec {text!r}; expected 'y=<mm>' or 'x=<mm>'")
        return cls("x" if key == "y" else "y", float(value))

    def __str__(self):
        return f"{'y' if self.axis == 'x' else 'x'}={self.offset_mm:g}"


@dataclass(frozen=True)
class ExtractionLine:
    nodes: np.ndarray
    coords: np.ndarray  # running coordinate along the line, mm
    line: LineSpec
    snapped_offset_mm: float
    snap_distance_mm: float


@dataclass(frozen=True, eq=False)
class PlateMesh:
    nx: int
    ny: int
    length_mm: float
    width_mm: float

    @property
    def dx(self) -> float:
        return self.length_mm / self.nx

    @property
    def dy(self) -> float:
        return self.width_mm / self.ny

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def n_dofs(self) -> int:
        return DOF_PER_NODE * self.n_nodes

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length_mm, self.nx + 1)

    @cached_property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.width_mm, self.ny + 1)

    def node_id(self, i, j):
        return np.asarray(j) * (self.nx + 1) + np.asarray(i)

    @cached_property
    def coords(self) -> np.ndarray:
        xx, yy = np.meshgrid(self.x, self.y)
        return np.column_stack([xx.ravel(), yy.ravel()])

    @cached_property
    def connectivity(self) -> np.ndarray:
        """(n_elements, 4) corner nodes, counterclockwise from the lower-left corner."""
        j, i = np.divmod(np.arange(self.n_elements), self.nx)
        n0 = self.node_id(i, j)
        return np.column_stack([n0, n0 + 1, n0 + self.nx + 2, n0 + self.nx + 1])

    @cached_property
    def element_dofs(self) -> np.ndarray:
        conn = self.connectivity
        return (DOF_PER_NODE * conn[:, :, None] + np.arange(DOF_PER_NODE)).reshape(len(conn), -1)

    @cached_property
    def perimeter_edges(self) -> np.ndarray:
        """(n, 2) node pairs along the boundary; one entry per boundary cell side."""
        i = np.arange(self.nx)
        j = np.arange(self.ny)
        bottom = np.column_stack([self.node_id(i, 0), self.node_id(i + 1, 0)])
        top = np.column_stack([self.node_id(i, self.ny), self.node_id(i + 1, self.ny)])
        left = np.column_stack([self.node_id(0, j), self.node_id(0, j + 1)])
        right = np.column_stack([self.node_id(self.nx, j), self.node_id(self.nx, j + 1)])
        return np.vstack([bottom, top, left, right])

    def boundary_nodes(self) -> np.ndarray:
        return np.unique(self.perimeter_edges)

    def stats(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "dx_mm": self.dx, "dy_mm": self.dy,
                "nodes": self.n_nodes, "elements": self.n_elements, "dofs": self.n_dofs}


def build_grid(panel: PanelModel | tuple[float, float], target_size: float) -> PlateMesh:
    """Grid whose cells are no larger than ``target_size`` and exactly tile the panel."""
    if isinstance(panel, PanelModel):
        length, width = panel.length_mm, panel.width_mm
    else:
        length, width = panel
    if not target_size > 0:
        raise MeshError("target_size must be positive")
    if target_size >= min(length, width) / 4:
        raise MeshError(f"mesh size {target_size} mm is too coarse for a "
                        f"{length}x{width} mm panel (must be < {min(length, width) / 4} mm)")
    return PlateMesh(math.ceil(length / target_size), math.ceil(width / target_size),
                     float(length), float(width))


def clamp_node_set(mesh: PlateMesh, pads) -> np.ndarray:
    """Sorted node indices covered by the clamp pad footprints."""
    tol = 1e-9 * mesh.length_mm
    found = []
    for pad in pads:
        lo, hi = pad.interval()
        i = np.nonzero((mesh.x >= lo - tol) & (mesh.x <= hi + tol))[0]
        if i.size == 0:
            raise MeshError(f"clamp pad at {pad.center_offset_from_short_edge_mm} mm on "
                            f"{pad.edge} captures no nodes (dx = {mesh.dx:.4g} mm)")
        j = 0 if pad.edge == "long_near" else mesh.ny
        found.append(mesh.node_id(i, j))
    return np.unique(np.concatenate(found)) if found else np.array([], dtype=int)


def extraction_line(mesh: PlateMesh, line: LineSpec) -> ExtractionLine:
    if line.axis == "x":
        grid, extent, along = mesh.y, mesh.width_mm, mesh.x
    else:
        grid, extent, along = mesh.x, mesh.length_mm, mesh.y
    if not 0.0 <= line.offset_mm <= extent:
        raise MeshError(f"line {line} lies outside the panel (0..{extent} mm)")
    k = int(np.argmin(np.abs(grid - line.offset_mm)))
    if line.axis == "x":
        nodes = mesh.node_id(np.arange(mesh.nx + 1), k)
    else:
        nodes = mesh.node_id(k, np.arange(mesh.ny + 1))
    return ExtractionLine(nodes, along.copy(), line, float(grid[k]),
                          float(abs(grid[k] - line.offset_mm)))
