"""Analytical plate solutions and the FEM verification harness.

Series solutions use plate coordinates x in [0, a], y in [0, b] and return the
deflection at the plate centre.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .loading import Footprint, nodal_forces
from .mesh import DOF_PER_NODE, PlateMesh
from .model import MaterialProps
from .plate_fem import PA_TO_N_MM2, apply_constraints, assemble, solve

BENCHMARK_CASES = ("ssss_uniform", "cccc_uniform", "ssss_patch")
TOLERANCES = {"ssss_uniform": 0.01, "cccc_uniform": 0.02, "ssss_patch": 0.02}


def navier_center_deflection(a, b, D, q, terms: int = 201, patch=None) -> float:
    """Simply supported rectangle under uniform pressure ``q``.

    ``patch=(u, v)`` restricts the load to a centred u-by-v rectangle.
    """
    m = np.arange(1, terms + 1, 2, dtype=float)[:, None]
    n = np.arange(1, terms + 1, 2, dtype=float)[None, :]
    sm, sn = np.sin(m * np.pi / 2), np.sin(n * np.pi / 2)
    if patch is None:
        qmn = 16.0 * q / (np.pi ** 2 * m * n)
    else:
        u, v = patch
        qmn = 16.0 * q / (np.pi ** 2 * m * n) * np.sin(m * np.pi * u / (2 * a)) * \
            np.sin(n * np.pi * v / (2 * b)) * sm * sn
    w = qmn * sm * sn / (np.pi ** 4 * D * ((m / a) ** 2 + (n / b) ** 2) ** 2)
    return float(w.sum())


def _edge_moment_mode(lam, half, D):
    """Coefficients (A, B) of A cosh(lam s) + B lam s sinh(lam s) for a unit edge moment.

    The mode vanishes at s = +-half and has -D Y'' = 1 there.
    """
    u = lam * half
    M = np.array([[np.cosh(u), u * np.sinh(u)],
                  [np.cosh(u), 2 * np.cosh(u) + u * np.sinh(u)]])
    return np.linalg.solve(M, [0.0, -1.0 / (D * lam ** 2)])


def clamped_square_center_deflection(a, D, q, terms: int = 121) -> float:
    """Clamped square plate by superposition of a simply supported solution and edge moments.

    The edge-moment amplitudes (one sine series per edge, equal on all four edges
    by symmetry) are found by enforcing zero normal slope along the edges.
    """
    h = 0.5 * a
    ms = np.arange(1, terms + 1, 2)
    lam = ms * np.pi / a
    sig = np.sin(ms * np.pi / 2)
    k = len(ms)

    slope_load = np.empty(k)
    w_load = np.empty(k)
    slope_unit = np.empty(k)
    w_unit = np.empty(k)
    coef = np.empty((k, 2))
    for i, (l, m) in enumerate(zip(lam, ms)):
        u = l * h
        P = 4.0 * q / (m * np.pi) / (D * l ** 4)
        M = np.array([[np.cosh(u), u * np.sinh(u)],
                      [np.cosh(u), 2 * np.cosh(u) + u * np.sinh(u)]])
        A, B = np.linalg.solve(M, [-P, 0.0])
        slope_load[i] = l * (A * np.sinh(u) + B * (np.sinh(u) + u * np.cosh(u)))
        w_load[i] = P + A
        A2, B2 = _edge_moment_mode(l, h, D)
        coef[i] = A2, B2
        slope_unit[i] = l * (A2 * np.sinh(u) + B2 * (np.sinh(u) + u * np.cosh(u)))
        w_unit[i] = A2

    # slope at y = b/2 due to the moment series on x = 0, a, projected on sin(lam_m x)
    L = lam[:, None]
    Mu = lam[None, :]
    C = coef[None, :, 0]
    G = coef[None, :, 1]
    s2 = L ** 2 + Mu ** 2
    proj = (2.0 / a) * (C * 2 * L * np.cosh(Mu * h) / s2
                        + G * 2 * L * Mu * (h * np.sinh(Mu * h) * s2 - 2 * Mu * np.cosh(Mu * h)) / s2 ** 2)
    cross = Mu * proj
    E = np.linalg.solve(np.diag(slope_unit) - cross, -slope_load)
    return float(np.sum((w_load + E * w_unit) * sig) + np.sum(E * w_unit * sig))


@dataclass(frozen=True)
class BenchmarkReport:
    case: str
    computed_mm: float
    analytical_mm: float
    relative_error: float
    tolerance: float
    cells: int
    runtime_s: float

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance

    def as_dict(self) -> dict:
        return {"case": self.case, "computed_mm": self.computed_mm,
                "analytical_mm": self.analytical_mm, "relative_error": self.relative_error,
                "tolerance": self.tolerance, "cells_per_side": self.cells, "passed": self.passed}


def _square_plate(cells, side):
    return PlateMesh(cells, cells, float(side), float(side))


def verify_benchmark(case: str, cells: int = 100, side_mm: float = 1000.0,
                     thickness_mm: float = 10.0, material: MaterialProps | None = None,
                     pressure_pa: float = 1000.0, patch_mm: tuple[float, float] = (200.0, 200.0)
                     ) -> BenchmarkReport:
    """Centre deflection of a square plate: FEM vs series solution."""
    if case not in BENCHMARK_CASES:
        raise ValueError(f"unknown benchmark {case!r}; choose from {BENCHMARK_CASES}")
    mat = material or MaterialProps(73e9, 0.23, 2500.0)
    t0 = time.perf_counter()
    mesh = _square_plate(cells, side_mm)
    system = assemble(mesh, mat, thickness_mm)
    E = mat.youngs_modulus_pa * PA_TO_N_MM2
    D = E * thickness_mm ** 3 / (12 * (1 - mat.poisson_ratio ** 2))
    q = pressure_pa * PA_TO_N_MM2

    boundary = mesh.boundary_nodes()
    if case == "cccc_uniform":
        system = apply_constraints(system, boundary, "fix_all")
    else:
        # hard simple support: w and the edge-tangential rotation vanish
        xy = mesh.coords[boundary]
        on_x_edge = np.isclose(xy[:, 1], 0) | np.isclose(xy[:, 1], side_mm)
        on_y_edge = np.isclose(xy[:, 0], 0) | np.isclose(xy[:, 0], side_mm)
        tangential = np.concatenate([DOF_PER_NODE * boundary[on_x_edge] + 2,
                                     DOF_PER_NODE * boundary[on_y_edge] + 1])
        system = apply_constraints(system, boundary, "pin_w", extra_dofs=tangential)

    if case == "ssss_patch":
        u, v = patch_mm
        c = 0.5 * side_mm
        fp = Footprint(c - 0.5 * u, c + 0.5 * u, c - 0.5 * v, c + 0.5 * v, q)
        analytical = navier_center_deflection(side_mm, side_mm, D, q, terms=801, patch=(u, v))
    else:
        fp = Footprint(0.0, side_mm, 0.0, side_mm, q)
        if case == "ssss_uniform":
            analytical = navier_center_deflection(side_mm, side_mm, D, q)
        else:
            analytical = clamped_square_center_deflection(side_mm, D, q)
    fld = solve(system.with_load(nodal_forces(mesh, [fp])))
    center = mesh.node_id(cells // 2, cells // 2) if cells % 2 == 0 else None
    if center is not None:
        computed = float(fld.w[center])
    else:
        # odd cell count: average the four nodes around the centre
        i = cells // 2
        computed = float(np.mean(fld.w[[mesh.node_id(i + di, i + dj) for di in (0, 1) for dj in (0, 1)]]))
    return BenchmarkReport(case, computed, analytical, abs(computed - analytical) / abs(analytical),
                           TOLERANCES[case], cells, time.perf_counter() - t0)
