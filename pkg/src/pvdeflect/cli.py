"""Command-line entry point: simulate, sweep, fit, correlate, verify.

Exit codes: 0 ok, 1 verification failure, 2 configuration/parse error,
3 solver or analysis error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import AnalysisError, compare_extrema, extract_profile, fit_quadratic, min_deflection, pearson
from .benchmarks import BENCHMARK_CASES, verify_benchmark
from .files import (ParseError, export_field, read_profile_csv, render_report, write_profile_csv,
                    write_report, write_sweep_csv)
from .loading import DegenerateSweepError
from .mesh import LineSpec, MeshError
from .model import ConfigError, load_config
from .plate_fem import NonConvergenceError, SingularSystemError
from .runner import Simulation, reference_band, worst

CONFIG_ENV = "PVDEFLECT_CONFIG"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3, 4


def _pair(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _window(text: str) -> tuple[float, float]:
    vals = _pair(text)
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise argparse.ArgumentTypeError(f"window must be 'lo,hi' with lo < hi, got {text!r}")
    return vals


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help=f"TOML configuration (default: ${CONFIG_ENV} or built-in defaults)")
    p.add_argument("--output-dir", default=argparse.SUPPRESS)
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    p.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS,
                   help="report format on stdout and in report files")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="pvdeflect", parents=[common],
                                     description="PV panel deflection under a cleaning robot")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="solve one robot position")
    sim.add_argument("--position", type=_pair,
                     help="robot centre 'x' or 'x,y' in mm (default: worst position of the scenario)")
    sim.add_argument("--export-field", type=Path, help="write the nodal field to this path")
    sim.add_argument("--field-format", choices=("csv_grid", "vtk_legacy"))
    sim.add_argument("--profile", help="profile line: inner_belt, center, 'y=<mm>' or 'x=<mm>'")
    sim.add_argument("--profile-window", type=_window)

    sw = sub.add_parser("sweep", parents=[common], help="solve every position of the scenario")
    sw.add_argument("--profile", default="inner_belt",
                    help="profile line analysed at the worst position (default inner_belt)")

    fit = sub.add_parser("fit", parents=[common], help="quadratic fit of a profile CSV")
    fit.add_argument("profile_csv", type=Path)
    fit.add_argument("--window", type=_window)

    cor = sub.add_parser("correlate", parents=[common], help="Pearson correlation of two profiles")
    cor.add_argument("profile_a", type=Path)
    cor.add_argument("profile_b", type=Path)
    cor.add_argument("--base", choices=("sim", "exp"), default="sim",
                     help="which minimum position the percentage discrepancy refers to")

    ver = sub.add_parser("verify", parents=[common], help="analytical plate benchmarks")
    ver.add_argument("--cells", type=int, default=100, help="cells per side (default 100)")
    ver.add_argument("--case", choices=BENCHMARK_CASES, action="append")
    return parser


def _settings(args):
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    config = load_config(Path(config_path)) if config_path else load_config()
    out = Path(getattr(args, "output_dir", None) or config.output.directory)
    return config, out, getattr(args, "threads", 1), getattr(args, "format", "json")


def _emit(report: dict, fmt: str, path: Path | None = None):
    text = render_report(report, fmt)
    sys.stdout.write(text)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        write_report(report, path, fmt)


def _line_for(spec: str, sim: Simulation, center_y: float) -> LineSpec:
    if spec == "inner_belt":
        return LineSpec("x", sim.inner_belt_line(center_y))
    if spec == "center":
        return LineSpec("x", 0.5 * sim.panel.width_mm)
    return LineSpec.parse(spec)


def _clamp_span(sim: Simulation) -> tuple[float, float]:
    xs = [p.center_offset_from_short_edge_mm for p in sim.panel.clamp_pads]
    return min(xs), max(xs)


def _profile_section(sim, result, spec, window, fit_window):
    line = _line_for(spec, sim, result.center_y)
    prof = extract_profile(result.field, sim.mesh, line, sim.config.output.profile_step_mm, window)
    xm, wm = min_deflection(prof)
    section = {"line": str(line), "snapped_offset_mm": prof.metadata["snapped_offset_mm"],
               "snap_distance_mm": prof.metadata["snap_distance_mm"], "samples": len(prof),
               "min_position_mm": xm, "min_deflection_mm": wm}
    for name, win in (("fit", fit_window), ("fit_clamp_span", _clamp_span(sim))):
        try:
            section[name] = fit_quadratic(prof, win).as_dict()
        except AnalysisError as exc:
            section[name] = {"error": str(exc)}
    return prof, section


def _base_report(sim: Simulation, command: str) -> dict:
    cfg = sim.config
    return {"tool": "pvdeflect", "version": __version__, "command": command,
            "config_digest": cfg.digest(), "mesh": sim.mesh.stats(),
            "normal_force_n": cfg.robot.normal_force_n,
            "solver": {"method": cfg.solver.method, "clamp_mode": cfg.solver.clamp_mode,
                       "clamped_nodes": int(len(sim.clamp_nodes)),
                       "free_dofs": int(len(sim.system.free))}}


def cmd_simulate(args) -> int:
    config, out, threads, fmt = _settings(args)
    sim = Simulation(config)
    if args.position:
        x = args.position[0]
        y = args.position[1] if len(args.position) > 1 else sim.positions()[0][1]
        result = sim.solve_at(x, y)
        source = "command_line"
    else:
        result = worst(sim.sweep(threads))
        source = "worst_of_scenario"
    report = _base_report(sim, "simulate")
    summary = result.summary()
    summary["position_source"] = source
    report["position"] = summary
    report["solver"]["relative_residual"] = result.field.residual
    f, _ = sim.load_vector(result.center_x, result.center_y)
    report["solver"]["applied_load_n"] = float(f[0::3].sum())
    report["solver"]["support_reaction_n"] = -result.field.total_reaction()
    band = reference_band(config.scenario.kind, summary["max_abs_w_mm"])
    if band is not None:
        report["reference_band"] = band
    out.mkdir(parents=True, exist_ok=True)
    if args.profile:
        window = args.profile_window
        prof, section = _profile_section(sim, result, args.profile, window, config.output.fit_window_mm)
        path = write_profile_csv(prof, out / "profile.csv",
                                 {"center_x_mm": result.center_x, "center_y_mm": result.center_y})
        section["file"] = path.name
        report["profile"] = section
    if args.export_field:
        ffmt = args.field_format or config.output.field_format
        export_field(result.field, sim.mesh, args.export_field, ffmt)
        report["field_export"] = {"file": args.export_field.name, "format": ffmt}
    _emit(report, fmt, out / f"simulate_report.{'json' if fmt == 'json' else 'txt'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config, out, threads, fmt = _settings(args)
    sim = Simulation(config)
    results = sim.sweep(threads)
    rows = [r.summary() for r in results]
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "sweep.csv")
    w = worst(results)
    report = _base_report(sim, "sweep")
    report["scenario"] = config.scenario.kind
    report["positions"] = rows
    report["worst_index"] = w.index
    report["solver"]["max_relative_residual"] = max(r.field.residual for r in results)
    band = reference_band(config.scenario.kind, w.field.max_abs_w()[0])
    if band is not None:
        report["reference_band"] = band
    prof, section = _profile_section(sim, w, args.profile, None, config.output.fit_window_mm)
    write_profile_csv(prof, out / "worst_profile.csv",
                      {"center_x_mm": w.center_x, "center_y_mm": w.center_y})
    section["file"] = "worst_profile.csv"
    report["worst_profile"] = section
    report["sweep_file"] = "sweep.csv"
    _emit(report, fmt, out / f"sweep_report.{'json' if fmt == 'json' else 'txt'}")
    return EXIT_OK


def cmd_fit(args) -> int:
    _, _, _, fmt = _settings(args)
    prof = read_profile_csv(args.profile_csv, source="input")
    fit = fit_quadratic(prof, args.window)
    report = {"command": "fit", "file": args.profile_csv.name, **fit.as_dict()}
    _emit(report, fmt)
    return EXIT_OK


def cmd_correlate(args) -> int:
    _, _, _, fmt = _settings(args)
    a = read_profile_csv(args.profile_a, source="simulation")
    b = read_profile_csv(args.profile_b, source="experiment")
    rep = pearson(a, b)
    report = {"command": "correlate", "file_a": args.profile_a.name, "file_b": args.profile_b.name,
              **rep.as_dict(), "extrema": compare_extrema(a, b, args.base)}
    _emit(report, fmt)
    return EXIT_OK


def cmd_verify(args) -> int:
    _, _, _, fmt = _settings(args)
    cases = args.case or list(BENCHMARK_CASES)
    reports = [verify_benchmark(c, cells=args.cells) for c in cases]
    if fmt == "json":
        _emit({"command": "verify", "benchmarks": [r.as_dict() for r in reports]}, fmt)
    else:
        print(f"{'case':<14} {'computed_mm':>14} {'analytical_mm':>14} {'rel_error':>10} {'tol':>6}  result")
        for r in reports:
            print(f"{r.case:<14} {r.computed_mm:>14.6g} {r.analytical_mm:>14.6g} "
                  f"{r.relative_error:>10.3e} {r.tolerance:>6.3g}  {'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "fit": cmd_fit,
            "correlate": cmd_correlate, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, MeshError, DegenerateSweepError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularSystemError, NonConvergenceError, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
