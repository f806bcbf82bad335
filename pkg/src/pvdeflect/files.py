"""Profile/sweep/field file formats and run reports.

Floats are written with ``repr`` (shortest round-tripping form) so re-ingested
values are bit-identical and repeated runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .analysis import Profile
from .mesh import PlateMesh
from .plate_fem import DeflectionField

PROFILE_HEADER = ("position_mm", "deflection_mm")
SWEEP_COLUMNS = ("index", "center_x_mm", "center_y_mm", "total_force_n",
                 "max_abs_w_mm", "max_x_mm", "max_y_mm")
SIGN_NOTE = "deflection negative downward (toward the ground)"


class ParseError(ValueError):
    pass


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if v == 0.0:
        v = 0.0  # no "-0.0"
    return repr(v)


def _comments(meta: dict) -> list[str]:
    return [f"# {k}: {meta[k]}" for k in sorted(meta)]


def write_profile_csv(profile: Profile, path, extra_meta: dict | None = None) -> Path:
    meta = {"source": profile.source, "convention": SIGN_NOTE}
    meta.update({k: v for k, v in profile.metadata.items()})
    meta.update(extra_meta or {})
    lines = _comments(meta) + [",".join(PROFILE_HEADER)]
    lines += [f"{fmt(x)},{fmt(y)}" for x, y in zip(profile.positions, profile.deflections)]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_profile_csv(path, source: str = "experiment") -> Profile:
    """Read a ``position_mm,deflection_mm`` CSV; ``#`` lines are metadata comments."""
    path = Path(path)
    text = path.read_text()
    rows = []
    header_seen = False
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            if tuple(cells) != PROFILE_HEADER:
                raise ParseError(f"{path}:{lineno}: expected header 'position_mm,deflection_mm', "
                                 f"got {','.join(cells)!r}")
            header_seen = True
            continue
        if len(cells) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 columns, got {len(cells)}")
        try:
            x, y = float(cells[0]), float(cells[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric value in {','.join(cells)!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError(f"{path}:{lineno}: non-finite value")
        rows.append((lineno, x, y))
    if not header_seen:
        raise ParseError(f"{path}: empty file (no header)")
    if not rows:
        raise ParseError(f"{path}: no data rows")
    for (_, x0, _), (lineno, x1, _) in zip(rows, rows[1:]):
        if x1 <= x0:
            raise ParseError(f"{path}:{lineno}: positions not strictly increasing "
                             f"({x1} after {x0})")
    # too few samples surfaces as an AnalysisError from Profile
    return Profile(np.array([r[1] for r in rows]), np.array([r[2] for r in rows]),
                   source, metadata={"file": path.name})


def read_experiment_csv(path) -> Profile:
    return read_profile_csv(path, source="experiment")


def write_sweep_csv(rows: list[dict], path) -> Path:
    lines = [",".join(SWEEP_COLUMNS)]
    lines += [",".join(fmt(r[c]) for c in SWEEP_COLUMNS) for r in rows]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def export_field(fld: DeflectionField, mesh: PlateMesh, path, format: str = "csv_grid") -> Path:
    """Write nodal deflection (negative downward) as a CSV grid or legacy ASCII VTK structured grid."""
    path = Path(path)
    deflection = -fld.w
    xy = mesh.coords
    if format == "csv_grid":
        meta = {"convention": SIGN_NOTE, "nx": mesh.nx, "ny": mesh.ny,
                "config_digest": fld.config_digest or "-"}
        lines = _comments(meta) + ["x_mm,y_mm,deflection_mm"]
        lines += [f"{fmt(x)},{fmt(y)},{fmt(d)}" for (x, y), d in zip(xy, deflection)]
    elif format == "vtk_legacy":
        n = mesh.n_nodes
        lines = ["# vtk DataFile Version 3.0",
                 f"pvdeflect deflection field, {SIGN_NOTE}",
                 "ASCII",
                 "DATASET STRUCTURED_GRID",
                 f"DIMENSIONS {mesh.nx + 1} {mesh.ny + 1} 1",
                 f"POINTS {n} double"]
        lines += [f"{fmt(x)} {fmt(y)} 0.0" for x, y in xy]
        lines += [f"POINT_DATA {n}", "SCALARS deflection_mm double 1", "LOOKUP_TABLE default"]
        lines += [fmt(d) for d in deflection]
    else:
        raise ValueError(f"unknown field format {format!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if not math.isfinite(v) else (0.0 if v == 0 else v)
    return obj


def render_report(report: dict, format: str = "json") -> str:
    report = _jsonable(report)
    if format == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    lines = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            lines.append(f"{prefix}: {fmt(obj) if isinstance(obj, float) else obj}")

    walk("", report)
    return "\n".join(lines) + "\n"


def write_report(report: dict, path, format: str = "json") -> Path:
    path = Path(path)
    path.write_text(render_report(report, format))
    return path
