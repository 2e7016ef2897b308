"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 singularity, 4 non-convergence,
5 infeasible.  Output is assembled in memory and only written once the
command has succeeded, so a failing run never leaves partial output.
"""

from __future__ import annotations

import argparse
import io
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .constants import GAUSS, GAUSS_PER_CM, MM, tesla_per_metre_to_gauss_per_cm
from .device import (
    AtomNumberModel,
    ConductorPath,
    DeviceCalibration,
    atom_number_estimate,
    calibrated_cylinder_trap,
    current_to_gradient,
    detuning_for_current,
    fit_gaussian_1d,
    power,
    tof_fit,
)
from .errors import (
    AsymmetryError,
    DegenerateConfigurationError,
    DomainError,
    FitFailureError,
    InfeasibleError,
    InsufficientDataError,
    InvalidArgumentError,
    InvalidDataError,
    NoConvergenceError,
    QuadTrapError,
    SingularityError,
)
from .formats import (
    assembly_to_dict,
    dumps,
    fmt,
    load_assembly,
    read_profile_csv,
    read_tof_csv,
    write_csv,
)
from .geometry import CylinderTrapParams, build_anti_helmholtz, build_cylinder_trap, with_drive_current
from .planar import feasible_curve, optimize_planar, scaling_study
from .trap import GridSpec, field_map, trap_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SINGULAR = 3
EXIT_NO_CONVERGENCE = 4
EXIT_INFEASIBLE = 5

LENGTH_UNITS = {"m": 1.0, "mm": MM}
FIELD_UNITS = {"tesla": 1.0, "gauss": GAUSS}
GRADIENT_UNITS = {"tesla": (1.0, "T/m"), "gauss": (GAUSS_PER_CM, "G/cm")}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, SingularityError):
        return EXIT_SINGULAR
    if isinstance(exc, (NoConvergenceError, FitFailureError)):
        return EXIT_NO_CONVERGENCE
    if isinstance(exc, InfeasibleError):
        return EXIT_INFEASIBLE
    if isinstance(
        exc,
        (
            InvalidArgumentError,
            DomainError,
            InsufficientDataError,
            InvalidDataError,
            DegenerateConfigurationError,
            AsymmetryError,
            ValueError,
        ),
    ):
        return EXIT_INPUT
    return 1


# --------------------------------------------------------------------------
# argument helpers

_QUANTITY = re.compile(r"^\s*([-+0-9.eE]+)\s*(mm|m)?\s*$")


def parse_length(text: str, default_unit: str = "mm") -> float:
    m = _QUANTITY.match(text)
    if not m:
        raise InvalidArgumentError(f"cannot parse length {text!r}")
    try:
        value = float(m.group(1))
    except ValueError:
        raise InvalidArgumentError(f"cannot parse length {text!r}") from None
    return value * LENGTH_UNITS[m.group(2) or default_unit]


def parse_floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"cannot parse number list {text!r}") from None
    if n is not None and len(vals) != n:
        raise InvalidArgumentError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None


def _assembly(args):
    if (args.assembly is None) == (args.inline is None):
        raise InvalidArgumentError("give exactly one of --assembly FILE or --inline JSON")
    text = args.inline if args.inline is not None else _read_text(args.assembly)
    return load_assembly(text)


def _calibration(args) -> DeviceCalibration:
    kw = {}
    if getattr(args, "resistance", None) is not None:
        kw["resistance"] = args.resistance
    if getattr(args, "gradient_per_ampere", None) is not None:
        kw["gradient_per_ampere"] = args.gradient_per_ampere
    return DeviceCalibration(**kw)


def _units(args):
    return LENGTH_UNITS[args.length_unit], FIELD_UNITS[args.field_unit]


# --------------------------------------------------------------------------
# commands; each returns (main output text, optional sidecar text)


def cmd_field_map(args):
    a = _assembly(args)
    lscale, bscale = _units(args)
    grid = GridSpec.parse(args.grid, scale=lscale)
    fm = field_map(a, grid)
    rows = []
    for s in fm.samples:
        b = s.b / bscale
        p = s.point / lscale
        rows.append((*p, *b, float(np.linalg.norm(s.b)) / bscale))
    return write_csv(("x", "y", "z", "Bx", "By", "Bz", "Bmag"), rows), None


def _vec_out(v, scale=1.0):
    return [float(fmt(float(c) / scale)) for c in v]


def cmd_report(args):
    a = _assembly(args)
    cal = _calibration(args)
    lscale, _ = _units(args)
    gscale, gunit = GRADIENT_UNITS[args.field_unit]
    guess = None if args.guess is None else np.array(parse_floats(args.guess, 3)) * lscale
    driven = with_drive_current(a, args.current)
    rep = trap_report(driven, guess)
    doc = {
        "label": a.label,
        "units": {"length": args.length_unit, "gradient": gunit},
        "zero": _vec_out(rep.zero, lscale),
        "gradient_tensor": [_vec_out(row, gscale) for row in rep.tensor.m],
        "eigenvalues": _vec_out(rep.eigenvalues, gscale),
        "axes": [_vec_out(ax) for ax in rep.axes],
        "ratio": _vec_out(rep.ratio),
        "drive_current_A": args.current,
        "power_W": power(cal.resistance, args.current),
        "model_gradient_G_per_cm": tesla_per_metre_to_gauss_per_cm(rep.strong_gradient),
        "estimated_gradient_G_per_cm": current_to_gradient(args.current, cal),
    }
    return dumps(doc), None


def _config_doc(cfg):
    return {"r1": cfg.r1, "r2": cfg.r2, "i1": cfg.i1, "i2": cfg.i2, "gradient": abs(cfg.gradient())}


def cmd_optimize_planar(args):
    if not args.z0 > 0:
        raise InvalidArgumentError(f"z0 must be positive, got {args.z0}")
    bounds = None if args.r1_bounds is None else tuple(parse_floats(args.r1_bounds, 2))
    opt = optimize_planar(args.z0, (args.radius, args.current), r1_bounds=bounds, r2_max=args.r2_max)
    lo, hi = bounds if bounds is not None else (0.02 * args.z0, 16 * args.z0 if args.r2_max is None else args.r2_max)
    r1_values = np.linspace(lo, hi, args.curve_points)
    curve = feasible_curve(args.z0, r1_values, args.r2_max)
    doc = {
        "z0": args.z0,
        "reference": {"radius_m": args.radius, "current_A": args.current},
        "config": _config_doc(opt.config),
        "gradient_2d_T_per_m": opt.gradient_2d,
        "gradient_3d_T_per_m": opt.gradient_3d,
        "gradient_ratio": opt.gradient_ratio,
        "power_ratio": opt.power_ratio,
        "feasible_curve": [_config_doc(c) for c in curve],
    }
    return dumps(doc), None


def cmd_scaling(args):
    scales = parse_floats(args.scales)
    if not scales or any(not s > 0 for s in scales):
        raise InvalidArgumentError("scales must be a list of positive numbers")
    path = ConductorPath(args.conductor_length, args.cross_section, args.resistivity)
    reference = build_anti_helmholtz(args.radius, 1.0)
    table = scaling_study(scales, args.target_gradient * GAUSS_PER_CM, path, reference)
    csv_text = write_csv(("scale", "current_A", "resistance_ohm", "power_W"), table.rows())
    sidecar = dumps(
        {
            "target_gradient_G_per_cm": args.target_gradient,
            "current_exponent": table.current_exponent,
            "resistance_exponent": table.resistance_exponent,
            "power_exponent": table.power_exponent,
        }
    )
    return csv_text, sidecar


def cmd_atoms(args):
    model = AtomNumberModel(exponent=args.exponent)
    d = parse_length(args.diameter, args.length_unit)
    n = atom_number_estimate(d, args.gradient, model)
    return dumps({"diameter_m": d, "gradient_G_per_cm": args.gradient, "exponent": model.exponent, "atom_number": n}), None


def cmd_tof_fit(args):
    samples = read_tof_csv(io.StringIO(_read_text(args.csv)))
    fit = tof_fit(samples)
    doc = {
        "temperature_K": fit.temperature,
        "temperature_uK": fit.temperature * 1e6,
        "sigma0_m": fit.sigma0,
        "residual_m": fit.residual,
        "degenerate": fit.degenerate,
        "samples": len(samples),
    }
    return dumps(doc), None


def cmd_fit_profile(args):
    profile = read_profile_csv(io.StringIO(_read_text(args.csv)))
    fit = fit_gaussian_1d(profile)
    return dumps(fit._asdict()), None


def cmd_power(args):
    cal = _calibration(args)
    det = detuning_for_current(args.current, cal)
    doc = {
        "current_A": args.current,
        "resistance_ohm": cal.resistance,
        "power_W": power(cal.resistance, args.current),
        "gradient_G_per_cm": current_to_gradient(args.current, cal),
        "detuning_MHz": det.mhz,
        "detuning_clamped": det.clamped,
    }
    return dumps(doc), None


def cmd_assembly(args):
    if args.kind == "anti-helmholtz":
        a = build_anti_helmholtz(parse_length(args.radius, args.length_unit), args.current)
    elif args.calibrated:
        a = calibrated_cylinder_trap(CylinderTrapParams(), _calibration(args))
    else:
        a = build_cylinder_trap(CylinderTrapParams(current=args.current))
    return dumps(assembly_to_dict(a)), None


# --------------------------------------------------------------------------


def _add_assembly_args(p):
    src = p.add_argument_group("assembly source (exactly one)")
    src.add_argument("--assembly", metavar="FILE", help="assembly JSON file ('-' for stdin)")
    src.add_argument("--inline", metavar="JSON", help="assembly JSON document")


def _add_unit_args(p):
    p.add_argument("--length-unit", choices=sorted(LENGTH_UNITS), default="mm")
    p.add_argument("--field-unit", choices=sorted(FIELD_UNITS), default="gauss")


def _add_calibration_args(p):
    p.add_argument("--resistance", type=float, help="device resistance in ohm (default 640e-6)")
    p.add_argument("--gradient-per-ampere", type=float, help="G/cm per A (default 10/15)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadtrap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field-map", help="sample the field on a grid (CSV)")
    _add_assembly_args(p)
    _add_unit_args(p)
    p.add_argument("--grid", required=True, help="e.g. x=-2:2:41,y=0,z=0 (length unit)")
    p.set_defaults(func=cmd_field_map)

    p = sub.add_parser("report", help="zero, gradient tensor and device numbers (JSON)")
    _add_assembly_args(p)
    _add_unit_args(p)
    _add_calibration_args(p)
    p.add_argument("--current", type=float, default=1.0, help="drive current in A")
    p.add_argument("--guess", help="x,y,z start point for the zero search (length unit)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("optimize-planar", help="planar versus anti-Helmholtz comparison (JSON)")
    p.add_argument("--z0", type=float, default=0.5, help="zero height in units of R")
    p.add_argument("--radius", type=float, default=1.0, help="reference radius R in m")
    p.add_argument("--current", type=float, default=1.0, help="reference current I in A")
    p.add_argument("--r1-bounds", help="lo,hi search interval for r1 (units of R)")
    p.add_argument("--r2-max", type=float, help="upper bound for r2 (units of R)")
    p.add_argument("--curve-points", type=int, default=200)
    p.set_defaults(func=cmd_optimize_planar)

    p = sub.add_parser("scaling", help="current/resistance/power versus device scale (CSV)")
    p.add_argument("--scales", default="0.5,1,2,4")
    p.add_argument("--target-gradient", type=float, default=10.0, help="G/cm")
    p.add_argument("--radius", type=float, default=1e-2, help="reference loop radius in m")
    p.add_argument("--conductor-length", type=float, default=0.2, help="m at scale 1")
    p.add_argument("--cross-section", type=float, default=1.5e-5, help="m^2 at scale 1")
    p.add_argument("--resistivity", type=float, default=5e-8, help="ohm m")
    p.add_argument("--sidecar", help="write fitted exponents JSON here (default: stderr)")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("atoms", help="atom number estimate (JSON)")
    p.add_argument("--diameter", required=True, help="beam diameter, e.g. 15mm")
    p.add_argument("--gradient", type=float, required=True, help="G/cm")
    p.add_argument("--exponent", type=float, default=5.82)
    p.add_argument("--length-unit", choices=sorted(LENGTH_UNITS), default="mm")
    p.set_defaults(func=cmd_atoms)

    p = sub.add_parser("tof-fit", help="temperature from a t_s,sigma_m CSV (JSON)")
    p.add_argument("csv", help="CSV path or '-'")
    p.set_defaults(func=cmd_tof_fit)

    p = sub.add_parser("fit-profile", help="Gaussian fit of an x,value CSV (JSON)")
    p.add_argument("csv", help="CSV path or '-'")
    p.set_defaults(func=cmd_fit_profile)

    p = sub.add_parser("power", help="power, gradient and detuning for a drive current (JSON)")
    p.add_argument("--current", type=float, required=True, help="A")
    _add_calibration_args(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("assembly", help="emit a built-in assembly as JSON")
    p.add_argument("kind", choices=["anti-helmholtz", "cylinder"])
    p.add_argument("--radius", default="1m", help="anti-Helmholtz loop radius")
    p.add_argument("--current", type=float, default=1.0)
    p.add_argument("--calibrated", action="store_true", help="cylinder: set drive_scale from the calibration")
    p.add_argument("--length-unit", choices=sorted(LENGTH_UNITS), default="mm")
    _add_calibration_args(p)
    p.set_defaults(func=cmd_assembly)

    for sp in sub.choices.values():
        sp.add_argument("--out", default="-", help="output path ('-' for stdout)")
    return parser


def _emit(text: str, dest: str):
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(dest).write_text(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text, sidecar = args.func(args)
    except (QuadTrapError, ValueError) as exc:
        code = exit_code_for(exc)
        extra = ""
        if isinstance(exc, (NoConvergenceError, FitFailureError)):
            extra = f" (residual {exc.residual:.3e})"
        print(f"quadtrap {args.command}: error: {exc}{extra}", file=sys.stderr)
        return code
    _emit(text, args.out)
    if sidecar is not None:
        if getattr(args, "sidecar", None):
            Path(args.sidecar).write_text(sidecar)
        else:
            sys.stderr.write(sidecar)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
