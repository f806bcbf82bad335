"""Deflection profiles, quadratic fits, extrema and Pearson correlation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import LineSpec, PlateMesh, extraction_line
from .plate_fem import DeflectionField

ALIGN_TOL_MM = 1e-6
MIN_SAMPLES = 3


class AnalysisError(ValueError):
    pass


class RankDeficiencyError(AnalysisError):
    pass


class AlignmentError(AnalysisError):
    pass


class ZeroVarianceError(AnalysisError):
    pass


@dataclass(frozen=True, eq=False)
class Profile:
    """Deflection samples along a line; deflection in mm, negative toward the ground."""

    positions: np.ndarray
    deflections: np.ndarray
    source: str = "simulation"
    line: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        val = np.asarray(self.deflections, dtype=float)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "deflections", val)
        if pos.ndim != 1 or pos.shape != val.shape:
            raise AnalysisError("positions and deflections must be 1-D arrays of equal length")
        if len(pos) < MIN_SAMPLES:
            raise AnalysisError(f"a profile needs >= {MIN_SAMPLES} samples, got {len(pos)}")
        if np.any(np.diff(pos) <= 0):
            k = int(np.nonzero(np.diff(pos) <= 0)[0][0]) + 1
            raise AnalysisError(f"positions must be strictly increasing (sample {k}: {pos[k]})")

    def __len__(self):
        return len(self.positions)

    def window_mask(self, lo: float, hi: float) -> np.ndarray:
        return (self.positions >= lo - ALIGN_TOL_MM) & (self.positions <= hi + ALIGN_TOL_MM)

    def window(self, lo: float, hi: float) -> "Profile":
        keep = self.window_mask(lo, hi)
        return Profile(self.positions[keep], self.deflections[keep], self.source, self.line,
                       dict(self.metadata))


@dataclass(frozen=True)
class ProfileFit:
    a: float
    b: float
    c: float
    rss: float
    r_squared: float
    n: int
    window: tuple[float, float]
    vertex: tuple[float, float] | None

    def __call__(self, x):
        return self.a * np.asarray(x) ** 2 + self.b * np.asarray(x) + self.c

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "rss": self.rss, "r_squared": self.r_squared,
                "n": self.n, "window_mm": list(self.window),
                "vertex_mm": None if self.vertex is None else list(self.vertex)}


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    mean_x: float
    mean_y: float
    var_x: float
    var_y: float
    n: int
    positions: np.ndarray = field(repr=False, compare=False)

    def as_dict(self) -> dict:
        return {"r": self.r, "n": self.n, "mean_a": self.mean_x, "mean_b": self.mean_y,
                "variance_a": self.var_x, "variance_b": self.var_y,
                "first_position_mm": float(self.positions[0]),
                "last_position_mm": float(self.positions[-1])}


def extract_profile(fld: DeflectionField, mesh: PlateMesh, line: LineSpec, step: float,
                    window: tuple[float, float] | None = None) -> Profile:
    """Sample the field every ``step`` mm along a snapped grid line.

    Values between nodes are linearly interpolated; the sign is flipped so the
    profile reads negative downward.
    """
    if not step > 0:
        raise AnalysisError("step must be positive")
    ext = extraction_line(mesh, line)
    extent = ext.coords[-1]
    lo, hi = (0.0, extent) if window is None else window
    if lo < 0 or hi > extent + ALIGN_TOL_MM or hi < lo:
        raise AnalysisError(f"window {lo}..{hi} mm is outside the line (0..{extent} mm)")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    positions = lo + step * np.arange(count)
    values = -np.interp(positions, ext.coords, fld.w[ext.nodes])
    meta = {"line": str(line), "snapped_offset_mm": ext.snapped_offset_mm,
            "snap_distance_mm": ext.snap_distance_mm, "step_mm": step}
    return Profile(positions, values + 0.0, "simulation", str(line), meta)


def fit_quadratic(profile: Profile, window: tuple[float, float] | None = None) -> ProfileFit:
    """Least-squares y = a x^2 + b x + c via QR on a scaled Vandermonde basis."""
    keep = slice(None) if window is None else profile.window_mask(*window)
    x, y = profile.positions[keep], profile.deflections[keep]
    if np.unique(x).size < 3:
        raise RankDeficiencyError(f"need >= 3 distinct positions to fit a quadratic, got {np.unique(x).size}")
    scale = float(np.max(np.abs(x))) or 1.0
    u = x / scale
    V = np.column_stack([np.ones_like(u), u, u * u])
    Q, R = np.linalg.qr(V)
    if abs(R[2, 2]) < 1e-12 * abs(R[0, 0]):
        raise RankDeficiencyError("design matrix is rank deficient")
    alpha = np.linalg.solve(R, Q.T @ y)
    resid = y - V @ alpha
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else -math.inf)
    a, b, c = alpha[2] / scale ** 2, alpha[1] / scale, alpha[0]
    vertex = None
    # no vertex for a numerically linear fit
    if abs(alpha[2]) > 1e-10 * max(abs(alpha[0]), abs(alpha[1]), abs(alpha[2])):
        xv = -b / (2 * a)
        vertex = (float(xv), float(a * xv * xv + b * xv + c))
    lo, hi = (float(x[0]), float(x[-1])) if window is None else (float(window[0]), float(window[1]))
    return ProfileFit(float(a), float(b), float(c), rss, float(r2), len(x), (lo, hi), vertex)


def min_deflection(profile: Profile) -> tuple[float, float]:
    """Position and value of the most negative sample; the smallest position wins ties."""
    k = int(np.argmin(profile.deflections))
    return float(profile.positions[k]), float(profile.deflections[k])


def align(a: Profile, b: Profile) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Samples of ``a`` and ``b`` at positions common to both (within 1e-6 mm)."""
    ia, ib = [], []
    j = 0
    for i, x in enumerate(a.positions):
        while j < len(b) and b.positions[j] < x - ALIGN_TOL_MM:
            j += 1
        if j < len(b) and abs(b.positions[j] - x) <= ALIGN_TOL_MM:
            ia.append(i)
            ib.append(j)
    ia, ib = np.array(ia, dtype=int), np.array(ib, dtype=int)
    return a.positions[ia], a.deflections[ia], b.deflections[ib]


def pearson(a: Profile, b: Profile) -> CorrelationReport:
    """Pearson r between two profiles sampled at the same positions.

    r = sum((x - xm)(y - ym)) / ((n - 1) sqrt(sx2 sy2)) with unbiased sample variances.
    """
    pos, x, y = align(a, b)
    n = len(pos)
    if n < 3:
        raise AlignmentError(f"profiles share only {n} common positions (need >= 3)")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ZeroVarianceError("a profile is constant over the common positions")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sx2 = float(np.sum(dx * dx) / (n - 1))
    sy2 = float(np.sum(dy * dy) / (n - 1))
    r = float(np.sum(dx * dy) / ((n - 1) * math.sqrt(sx2 * sy2)))
    r = min(1.0, max(-1.0, r))
    return CorrelationReport(r, float(xm), float(ym), sx2, sy2, n, pos)


def compare_extrema(sim: Profile, exp: Profile, base: str = "sim") -> dict:
    """Discrepancy between the minima of two profiles.

    ``base`` picks which minimum position the percentage is relative to.
    """
    xs, ws = min_deflection(sim)
    xe, we = min_deflection(exp)
    ref = xs if base == "sim" else xe
    dpos = abs(xs - xe)
    return {"sim_min_position_mm": xs, "sim_min_deflection_mm": ws,
            "exp_min_position_mm": xe, "exp_min_deflection_mm": we,
            "delta_position_mm": dpos,
            "delta_position_pct": 100.0 * dpos / abs(ref) if ref != 0 else (0.0 if dpos == 0 else math.inf),
            "position_base": base,
            "delta_value_mm": abs(ws - we)}
