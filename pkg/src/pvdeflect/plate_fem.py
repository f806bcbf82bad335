"""Thin-plate bending finite elements with perimeter frame stiffeners.

The plate element is the 12-DOF non-conforming Kirchhoff rectangle (Adini-Clough-Melosh).
Per node the DOFs are ``(w, theta_x, theta_y)`` with ``theta_x = dw/dy`` and
``theta_y = -dw/dx``; ``w`` is positive in the direction of the applied load.
Inside this module lengths are mm, forces N, moduli N/mm^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import DOF_PER_NODE, PlateMesh
from .model import FrameSection, MaterialProps

PA_TO_N_MM2 = 1e-6

# monomial exponents of the 12-term ACM displacement polynomial
_EXPONENTS = np.array([(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
                       (3, 0), (2, 1), (1, 2), (0, 3), (3, 1), (1, 3)])
_CORNERS = np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


class SingularSystemError(RuntimeError):
    """Constraints leave a rigid-body mode; the reduced stiffness is not positive definite."""


class NonConvergenceError(RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _monomial_derivative(s, t, ds: int, dt: int) -> np.ndarray:
    """d^(ds+dt)/ds^ds dt^dt of every basis monomial at (s, t); shape (..., 12)."""
    s = np.asarray(s, dtype=float)[..., None]
    t = np.asarray(t, dtype=float)[..., None]
    i, j = _EXPONENTS[:, 0], _EXPONENTS[:, 1]
    ci = np.ones(12)
    cj = np.ones(12)
    for k in range(ds):
        ci = ci * (i - k)
    for k in range(dt):
        cj = cj * (j - k)
    pi = np.maximum(i - ds, 0)
    pj = np.maximum(j - dt, 0)
    return ci * cj * s ** pi * t ** pj


@lru_cache(maxsize=32)
def _coefficient_map(dx: float, dy: float) -> np.ndarray:
    """Inverse of the nodal-DOF collocation matrix (normalized coordinates s = x/dx, t = y/dy)."""
    rows = []
    for s, t in _CORNERS:
        rows.append(_monomial_derivative(s, t, 0, 0))
        rows.append(_monomial_derivative(s, t, 0, 1) / dy)
        rows.append(-_monomial_derivative(s, t, 1, 0) / dx)
    return np.linalg.inv(np.array(rows))


def shape_functions(dx, dy, s, t) -> np.ndarray:
    """Element shape functions at normalized points; shape (..., 12)."""
    return _monomial_derivative(s, t, 0, 0) @ _coefficient_map(dx, dy)


def curvature_matrix(dx, dy, s, t) -> np.ndarray:
    """B with rows (w_xx, w_yy, 2 w_xy) at normalized points; shape (..., 3, 12)."""
    cinv = _coefficient_map(dx, dy)
    return np.stack([
        _monomial_derivative(s, t, 2, 0) @ cinv / dx ** 2,
        _monomial_derivative(s, t, 0, 2) @ cinv / dy ** 2,
        2.0 * _monomial_derivative(s, t, 1, 1) @ cinv / (dx * dy),
    ], axis=-2)


def bending_constitutive(D: float, nu: float) -> np.ndarray:
    return D * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])


def plate_element_stiffness(dx: float, dy: float, D: float, nu: float) -> np.ndarray:
    """12x12 bending stiffness of a dx-by-dy rectangle with rigidity D.

    Units follow the inputs: with mm and N*mm the result is in N/mm (w rows)
    and N*mm/rad (rotation rows).
    """
    g, wts = np.polynomial.legendre.leggauss(3)
    g = 0.5 * (g + 1.0)
    wts = 0.5 * wts
    s, t = np.meshgrid(g, g, indexing="ij")
    w = np.outer(wts, wts)
    B = curvature_matrix(dx, dy, s.ravel(), t.ravel())
    Db = bending_constitutive(D, nu)
    K = np.einsum("q,qai,ab,qbj->ij", w.ravel(), B, Db, B) * dx * dy
    return 0.5 * (K + K.T)


def element_moments(dofs, dx, dy, D, nu, s=0.5, t=0.5) -> np.ndarray:
    """Bending moments (Mx, My, Mxy) = Db . curvature at a normalized point."""
    return bending_constitutive(D, nu) @ (curvature_matrix(dx, dy, s, t) @ np.asarray(dofs))


def _monomial_integrals(s1, s2, t1, t2) -> np.ndarray:
    """Integral of each monomial over [s1, s2] x [t1, t2]; shape (n, 12)."""
    i, j = _EXPONENTS[:, 0], _EXPONENTS[:, 1]
    s1, s2, t1, t2 = (np.asarray(a, dtype=float)[:, None] for a in (s1, s2, t1, t2))
    return ((s2 ** (i + 1) - s1 ** (i + 1)) / (i + 1)) * ((t2 ** (j + 1) - t1 ** (j + 1)) / (j + 1))


def pressure_load_vectors(dx, dy, s1, s2, t1, t2) -> np.ndarray:
    """Consistent element loads for unit pressure over sub-rectangles in normalized coordinates."""
    return _monomial_integrals(s1, s2, t1, t2) @ _coefficient_map(dx, dy) * (dx * dy)


def beam_element_stiffness(length: float, E: float, section: FrameSection, G: float) -> np.ndarray:
    """6x6 beam stiffness in local DOFs (w1, phi1, psi1, w2, phi2, psi2).

    ``phi`` is the bending slope dw/ds along the member and ``psi`` the twist about
    its axis. E and G in N/mm^2, section constants in mm^2/mm^4.
    """
    L = length
    kb = E * section.bending_inertia_mm4 / L ** 3
    kt = G * section.torsion_constant_mm4 / L
    bend = kb * np.array([[12.0, 6 * L, -12.0, 6 * L],
                          [6 * L, 4 * L * L, -6 * L, 2 * L * L],
                          [-12.0, -6 * L, 12.0, -6 * L],
                          [6 * L, 2 * L * L, -6 * L, 4 * L * L]])
    K = np.zeros((6, 6))
    idx = [0, 1, 3, 4]
    K[np.ix_(idx, idx)] = bend
    K[np.ix_([2, 5], [2, 5])] = kt * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return K


# local (w, phi, psi) from nodal (w, theta_x, theta_y)
_BEAM_X_MAP = np.array([[1.0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
_BEAM_Y_MAP = np.eye(3)


def beam_element_global(length, E, section, G, along: str) -> np.ndarray:
    T1 = _BEAM_X_MAP if along == "x" else _BEAM_Y_MAP
    T = np.kron(np.eye(2), T1)
    return T.T @ beam_element_stiffness(length, E, section, G) @ T


@dataclass(frozen=True, eq=False)
class GlobalSystem:
    """Global stiffness and load.

    ``stiffness`` is the full (unconstrained) matrix; ``free`` lists the DOFs kept
    after constraints. Systems derived via :meth:`with_load` share one factorization.
    """

    stiffness: sp.csr_matrix
    load: np.ndarray
    mesh: PlateMesh
    free: np.ndarray
    constrained_nodes: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_dofs(self) -> int:
        return self.stiffness.shape[0]

    @property
    def reduced_stiffness(self) -> sp.csc_matrix:
        if "Kff" not in self._cache:
            self._cache["Kff"] = self.stiffness[self.free][:, self.free].tocsc()
        return self._cache["Kff"]

    def with_load(self, load: np.ndarray) -> "GlobalSystem":
        load = np.asarray(load, dtype=float)
        if load.shape != (self.n_dofs,):
            raise ValueError(f"load vector must have shape ({self.n_dofs},)")
        return replace(self, load=load, _cache=self._cache)


@dataclass(frozen=True, eq=False)
class DeflectionField:
    """Solved nodal field. ``w`` in mm, positive toward the load (downward)."""

    mesh: PlateMesh
    w: np.ndarray
    theta_x: np.ndarray
    theta_y: np.ndarray
    reactions: np.ndarray
    residual: float
    config_digest: str = ""

    def max_abs_w(self) -> tuple[float, float, float]:
        """(max |w|, x, y) of the largest nodal deflection; first node wins ties."""
        k = int(np.argmax(np.abs(self.w)))
        x, y = self.mesh.coords[k]
        return float(abs(self.w[k])), float(x), float(y)

    def grid(self) -> np.ndarray:
        """w reshaped to (ny + 1, nx + 1)."""
        return self.w.reshape(self.mesh.ny + 1, self.mesh.nx + 1)

    def total_reaction(self) -> float:
        return float(self.reactions[0::DOF_PER_NODE].sum())


def assemble(mesh: PlateMesh, glass: MaterialProps, thickness_mm: float,
             frame_section: FrameSection | None = None,
             frame_material: MaterialProps | None = None) -> GlobalSystem:
    """Unconstrained global stiffness: plate elements plus one beam per perimeter edge."""
    E = glass.youngs_modulus_pa * PA_TO_N_MM2
    nu = glass.poisson_ratio
    D = E * thickness_mm ** 3 / (12.0 * (1.0 - nu ** 2))
    Ke = plate_element_stiffness(mesh.dx, mesh.dy, D, nu)
    edofs = mesh.element_dofs
    rows = [np.repeat(edofs, 12, axis=1).ravel()]
    cols = [np.tile(edofs, (1, 12)).ravel()]
    vals = [np.broadcast_to(Ke.ravel(), (len(edofs), 144)).ravel()]

    if frame_section is not None:
        if frame_material is None:
            raise ValueError("frame_material is required with frame_section")
        Ef = frame_material.youngs_modulus_pa * PA_TO_N_MM2
        Gf = frame_material.shear_modulus_pa * PA_TO_N_MM2
        Kx = beam_element_global(mesh.dx, Ef, frame_section, Gf, "x")
        Ky = beam_element_global(mesh.dy, Ef, frame_section, Gf, "y")
        edges = mesh.perimeter_edges
        along_x = np.zeros(len(edges), dtype=bool)
        along_x[: 2 * mesh.nx] = True
        bdofs = (DOF_PER_NODE * edges[:, :, None] + np.arange(DOF_PER_NODE)).reshape(len(edges), 6)
        blocks = np.where(along_x[:, None, None], Kx, Ky).reshape(len(edges), 36)
        rows.append(np.repeat(bdofs, 6, axis=1).ravel())
        cols.append(np.tile(bdofs, (1, 6)).ravel())
        vals.append(blocks.ravel())

    n = mesh.n_dofs
    K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n)).tocsr()
    K.sum_duplicates()
    return GlobalSystem(K, np.zeros(n), mesh, np.arange(n))


def constrained_dofs(nodes, mode: str) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=int)
    if mode == "pin_w":
        return DOF_PER_NODE * nodes
    if mode == "fix_all":
        return (DOF_PER_NODE * nodes[:, None] + np.arange(DOF_PER_NODE)).ravel()
    raise ValueError(f"unknown constraint mode {mode!r}")


def apply_constraints(system: GlobalSystem, constrained, mode: str = "fix_all",
                      extra_dofs=None) -> GlobalSystem:
    """Eliminate constrained DOFs (rows and columns) from the system.

    ``extra_dofs`` adds individual global DOF indices, used e.g. for the
    tangential rotation of simply supported edges.
    """
    nodes = np.unique(np.asarray(constrained, dtype=int))
    fixed = constrained_dofs(nodes, mode)
    if extra_dofs is not None:
        fixed = np.union1d(fixed, np.asarray(extra_dofs, dtype=int))
    mask = np.ones(system.n_dofs, dtype=bool)
    mask[fixed] = False
    return replace(system, free=np.nonzero(mask)[0], constrained_nodes=nodes, _cache={})


def factorize(system: GlobalSystem):
    if "factor" in system._cache:
        return system._cache["factor"]
    A = system.reduced_stiffness
    if A.shape[0] == 0:
        raise SingularSystemError("no free degrees of freedom")
    d = A.diagonal()
    if np.any(d <= 0):
        raise SingularSystemError("non-positive stiffness diagonal")
    scale = 1.0 / np.sqrt(d)
    As = (sp.diags(scale) @ A @ sp.diags(scale)).tocsc()
    try:
        lu = spla.splu(As, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SingularSystemError(f"factorization failed: {exc}") from exc
    pivots = lu.U.diagonal()
    # symmetric-mode LU of an SPD matrix is LDL^T: every pivot must be clearly positive
    if pivots.min() <= 1e-10 * np.abs(pivots).max():
        raise SingularSystemError(
            f"stiffness is singular or indefinite after constraints "
            f"(min pivot {pivots.min():.3e}); a rigid-body mode remains")
    system._cache["factor"] = (lu, scale, As)
    return system._cache["factor"]


def _residual_extended(K: sp.csc_matrix, u: np.ndarray, f: np.ndarray) -> np.ndarray:
    """f - K u accumulated in long double, rounded to float64."""
    Kc = K.tocsr() if not sp.isspmatrix_csr(K) else K
    prod = Kc.data.astype(np.longdouble) * u[Kc.indices].astype(np.longdouble)
    counts = np.diff(Kc.indptr)
    ku = np.zeros(Kc.shape[0], dtype=np.longdouble)
    nz = counts > 0
    ku[nz] = np.add.reduceat(prod, Kc.indptr[:-1][nz])
    return (f.astype(np.longdouble) - ku).astype(float)


def solve(system: GlobalSystem, method: str = "direct", rtol: float = 1e-10,
          config_digest: str = "") -> DeflectionField:
    """Solve K u = f on the free DOFs; constrained DOFs are zero."""
    K = system.reduced_stiffness
    f = system.load[system.free]
    fnorm = np.linalg.norm(f)
    u = np.zeros(system.n_dofs)
    residual = 0.0
    if method == "direct":
        lu, scale, _ = factorize(system)
        if fnorm > 0:
            uf = scale * lu.solve(scale * f)
            # refinement with extended-precision residuals drives the forward error
            # down to float64 rounding of u
            for _ in range(4):
                du = scale * lu.solve(scale * _residual_extended(K, uf, f))
                uf = uf + du
                if np.linalg.norm(du) <= 4 * np.finfo(float).eps * np.linalg.norm(uf):
                    break
            residual = float(np.linalg.norm(_residual_extended(K, uf, f)) / fnorm)
            u[system.free] = uf
    elif method == "cg":
        d = K.diagonal()
        if np.any(d <= 0):
            raise SingularSystemError("non-positive stiffness diagonal")
        if fnorm > 0:
            precond = sp.diags(1.0 / d)
            uf, info = spla.cg(K, f, rtol=rtol, atol=0.0, M=precond, maxiter=20 * K.shape[0])
            residual = float(np.linalg.norm(f - K @ uf) / fnorm)
            if info != 0:
                raise NonConvergenceError(
                    f"conjugate gradient did not converge (relative residual {residual:.3e})",
                    residual)
            u[system.free] = uf
    else:
        raise ValueError(f"unknown solver method {method!r}")
    reactions = system.stiffness @ u - system.load
    reactions[system.free] = 0.0
    return DeflectionField(system.mesh, u[0::3].copy(), u[1::3].copy(), u[2::3].copy(),
                           reactions, residual, config_digest)
