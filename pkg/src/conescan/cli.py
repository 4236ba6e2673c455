"""Command-line front end.

Exit codes: 0 success, 1 a requirement or constraint check failed,
2 bad input or usage, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from math import pi

from . import io as cio
from .design import fit_profile, generate_fit_samples, linearity_report, validate_design
from .errors import ConescanError, InputError, NumericalError, RequirementViolation
from .geometry import DesignParams, RequirementSpec, contact_from_deflection, tip_pose
from .kinematics import simulate_scan, solve_deflection
from .metrics import match_ratio, mismatch_report
from .planning import (
    DEFAULT_OMEGA_CAP,
    DEFAULT_REWIND_DURATION,
    GEAR_RATIO_MOTOR_PER_CAM,
    constant_cam_speed_program,
    constant_speed_cam_program,
    coverage_report,
    plan_raster,
    plan_spiral,
)
from .svg import write_svg_plot

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

UNITS_NOTE = "Units: lengths mm, times s, speeds mm/s, angular rates rad/s, angles deg."


def _context(args, need_profile=True):
    """Design, profile, requirements and tube-radius override from the flags."""
    extras = {}
    if getattr(args, "design", None):
        params, extras = cio.load_design(args.design)
    else:
        params = DesignParams()
    factor = getattr(args, "scale", None) or 1.0
    if factor != 1.0:
        params = params.scaled(factor)
    tube_radius = extras.get("tube_radius")
    if tube_radius is not None:
        tube_radius *= factor
    if getattr(args, "requirements", None):
        req = cio.load_requirements(args.requirements)
        if factor != 1.0:
            req = req.scaled(factor)
    else:
        req = RequirementSpec().scaled(params.scale)
    profile = None
    if need_profile:
        if getattr(args, "profile", None):
            profile = cio.load_profile(args.profile)
            if factor != 1.0:
                profile = profile.scaled(factor)
        else:
            profile = fit_profile(generate_fit_samples(params), tube_radius)
    return params, profile, req, tube_radius


def _emit(text, out):
    if out:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def cmd_fit_profile(args):
    params, _, _, tube_radius = _context(args, need_profile=False)
    samples = generate_fit_samples(params, n=args.samples, per_turn=args.per_turn)
    profile = fit_profile(samples, tube_radius)
    lin = linearity_report(profile, params)
    if args.out:
        cio.save_profile(profile, args.out)
    else:
        sys.stdout.write(cio.format_config(profile.to_mapping(), cio.PROFILE_HEADER))
    print(f"A = {profile.A:.6g} 1/mm, B = {profile.B:.6g}, C = {profile.C:.6g} mm")
    print(f"s_max = {profile.s_max:.6g} mm, f_max (m) = {profile.f_max:.6g} mm")
    print(lin.to_text())
    return EXIT_OK


def cmd_solve(args):
    params, profile, _, _ = _context(args, need_profile=args.z is None)
    if args.z is not None:
        g = contact_from_deflection(args.z, args.d, params)
        print(f"d = {g.d:.6g} mm, z = {g.z:.6g} mm")
        print(f"e = {g.e:.9g} mm, gamma = {g.gamma * 180 / pi:.6g} deg, theta = {g.theta * 180 / pi:.6g} deg")
        print(f"s = {g.s:.9g} mm, f = {g.f:.9g} mm")
        return EXIT_OK
    z = solve_deflection(args.d, profile, params)
    print(f"d = {args.d:.6g} mm -> z = {z:.9g} mm (linear target {params.gain * args.d:.9g} mm)")
    return EXIT_OK


def _program(args, params, profile, req):
    if getattr(args, "turns", None) is not None:
        return constant_cam_speed_program(args.turns, args.duration, args.gear_ratio)
    return constant_speed_cam_program(
        profile,
        params,
        tip_speed=0.38 * params.scale if args.speed is None else args.speed,
        omega_cap=args.cap,
        dt=args.dt,
        req=req,
        rewind_duration=args.rewind,
        gear_ratio=args.gear_ratio,
    )


def cmd_simulate(args):
    params, profile, req, _ = _context(args)
    program = _program(args, params, profile, req)
    traj = simulate_scan(program, profile, params, dt=args.dt, include_rewind=args.include_rewind)
    _emit(cio.trajectory_to_csv(traj), args.out)
    if args.out:
        r = traj.radius
        print(
            f"{len(traj)} samples over {traj.duration:.3f} s; final radius {r[-1]:.6f} mm; "
            f"max radius {r.max():.6f} mm; {program.forward_turns():.4f} cam turns"
        )
    return EXIT_OK


def cmd_check(args):
    params, profile, req, tube_radius = _context(args)
    report = validate_design(profile, params, req, tube_radius=tube_radius)
    pose = tip_pose(params.Z, params)
    print(report.to_text())
    print(f"worst tip height {pose.height:.3f} mm, worst inclination {pose.inclination_deg:.2f} deg")
    if args.out:
        _emit(report.to_csv(), args.out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_motor_profile(args):
    params, profile, req, _ = _context(args)
    program = _program(args, params, profile, req)
    _emit(program.to_csv(), args.out)
    if args.out:
        rw = program.rewind
        print(
            f"forward {program.forward_duration:.3f} s, {program.forward_turns():.4f} cam turns; "
            f"rewind {rw.duration:.3f} s at {rw.omega:.4f} rad/s; "
            f"motor/cam ratio {program.gear_ratio_motor_per_cam:.6g}"
        )
    return EXIT_OK


def cmd_plan(args):
    factor = args.scale or 1.0
    req = cio.load_requirements(args.requirements) if args.requirements else RequirementSpec()
    req = req.scaled(factor)
    args.pitch = 0.15 * factor if args.pitch is None else args.pitch
    args.radius = 1.0 * factor if args.radius is None else args.radius
    args.speed = 0.38 * factor if args.speed is None else args.speed
    if args.pattern == "spiral":
        plan = plan_spiral(args.pitch, args.radius, args.speed, dt=args.dt, req=req)
    else:
        width = args.width if args.width is not None else 2 * args.radius
        height = args.height if args.height is not None else width
        plan = plan_raster(args.pitch, width, height, args.speed, dt=args.dt, req=req)
    traj = plan.trajectory
    _emit(cio.trajectory_to_csv(traj), args.out)
    report = coverage_report(traj, fov_halfmin=args.fov * factor, req=req, pattern=args.pattern)
    if args.out:
        print(f"{plan.pattern}: {len(traj)} samples, duration {plan.duration:.3f} s, path {traj.path_length():.4f} mm")
        print(report.to_text())
    return EXIT_OK


def cmd_compare(args):
    image = cio.read_trajectory(args.image)
    probe = cio.read_trajectory(args.probe)
    report = mismatch_report(image, probe, step=args.step)
    print(f"D={report.D:.6g} mm")
    print(f"C={report.C:.6g} mm/s")
    print(f"t_f={report.t_f:.6g} s, samples={report.n_samples}")
    return EXIT_OK


def cmd_match_ratio(args):
    traj = cio.read_trajectory(args.traj)
    report = match_ratio(
        traj, args.pitch, args.radius, dot_spacing=args.dot_spacing, half_thickness=args.half_thickness
    )
    print(report.to_text())
    if args.min_ratio is not None and report.ratio < args.min_ratio:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_plot(args):
    series = []
    for path in args.traj:
        traj = cio.read_trajectory(path)
        series.append((traj.label, traj.points))
    write_svg_plot(series, args.out, style=args.style, title=args.title)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(
        prog="conescan",
        description="Design, simulate and score a cam-on-cone spiral scanner. " + UNITS_NOTE,
        formatter_class=fmt,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def design_flags(p, profile=True, requirements=False):
        p.add_argument("--design", help="design config (key = value); defaults when omitted")
        if profile:
            p.add_argument("--profile", help="profile config; fitted from the design when omitted")
        if requirements:
            p.add_argument("--requirements", help="requirements config; unity-scale defaults when omitted")
        p.add_argument("--scale", type=float, default=1.0, help="geometric scale factor applied to all inputs")

    def program_flags(p):
        p.add_argument("--speed", type=float, help="target tip speed (mm/s); 0.38 x scale when omitted")
        p.add_argument("--cap", type=float, default=DEFAULT_OMEGA_CAP, help="cam speed cap (rad/s)")
        p.add_argument("--dt", type=float, default=0.01, help="time step (s)")
        p.add_argument("--rewind", type=float, default=DEFAULT_REWIND_DURATION, help="rewind duration (s)")
        p.add_argument("--gear-ratio", type=float, default=GEAR_RATIO_MOTOR_PER_CAM, help="motor turns per cam turn")

    p = sub.add_parser("fit-profile", help="fit the quadratic cone profile", formatter_class=fmt,
                       description="Fit f'(s) = A s^2 + B s + C to design-path samples. " + UNITS_NOTE)
    design_flags(p, profile=False)
    p.add_argument("--samples", type=int, default=6, help="number of samples along the linear law")
    p.add_argument("--per-turn", action="store_true", help="space samples one cam turn apart (z_i = i alpha)")
    p.add_argument("--out", help="profile config to write (stdout when omitted)")
    p.set_defaults(func=cmd_fit_profile)

    p = sub.add_parser("solve", help="tip deflection for a cam travel", formatter_class=fmt,
                       description="Solve the contact condition for z at cam travel d, or with --z "
                       "evaluate the contact geometry at (z, d). " + UNITS_NOTE)
    design_flags(p)
    p.add_argument("--d", type=float, required=True, help="cam travel (mm)")
    p.add_argument("--z", type=float, help="tip deflection (mm); prints the contact geometry instead")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="simulate a scan to a trajectory CSV", formatter_class=fmt,
                       description="Simulate the probe trajectory for a constant-tip-speed program, or a "
                       "constant cam speed with --turns/--duration. " + UNITS_NOTE)
    design_flags(p, requirements=True)
    program_flags(p)
    p.add_argument("--turns", type=float, help="constant cam speed: number of cam turns")
    p.add_argument("--duration", type=float, default=60.0, help="constant cam speed: duration (s)")
    p.add_argument("--include-rewind", action="store_true", help="also simulate the rewind phase")
    p.add_argument("--out", help="trajectory CSV (t,x,y) to write (stdout when omitted)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="check the design against the requirements", formatter_class=fmt,
                       description="Worst-case constraint report over z in [0, Z]. Exit 1 on any failure. "
                       + UNITS_NOTE)
    design_flags(p, requirements=True)
    p.add_argument("--out", help="also write the report as CSV")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("motor-profile", help="constant-tip-speed cam and motor program", formatter_class=fmt,
                       description="Cam/motor angular-velocity setpoints (CSV t,omega_cam,omega_motor). "
                       + UNITS_NOTE)
    design_flags(p, requirements=True)
    program_flags(p)
    p.add_argument("--out", help="program CSV to write (stdout when omitted)")
    p.set_defaults(func=cmd_motor_profile)

    p = sub.add_parser("plan", help="commanded spiral or raster path", formatter_class=fmt,
                       description="Commanded scan path at constant tip speed plus a coverage report. "
                       + UNITS_NOTE)
    p.add_argument("--pattern", choices=("spiral", "raster"), default="spiral")
    p.add_argument("--pitch", type=float, help="turn or line spacing (mm); 0.15 x scale when omitted")
    p.add_argument("--radius", type=float,
                   help="spiral outer radius, also the raster half-width default (mm); 1 x scale when omitted")
    p.add_argument("--width", type=float, help="raster stroke length (mm)")
    p.add_argument("--height", type=float, help="raster extent across strokes (mm)")
    p.add_argument("--speed", type=float, help="tip speed (mm/s); 0.38 x scale when omitted")
    p.add_argument("--dt", type=float, default=0.01, help="sample interval (s)")
    p.add_argument("--fov", type=float, default=0.1, help="half the smaller field-of-view side at unity scale (mm)")
    p.add_argument("--requirements", help="requirements config; unity-scale defaults when omitted")
    p.add_argument("--scale", type=float, default=1.0, help="scale factor for requirements and defaults")
    p.add_argument("--out", help="trajectory CSV to write (stdout when omitted)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compare", help="position/velocity mismatch D and C", formatter_class=fmt,
                       description="Time-averaged mismatch between image and probe trajectories. " + UNITS_NOTE)
    p.add_argument("--image", required=True, help="image trajectory CSV")
    p.add_argument("--probe", required=True, help="probe trajectory CSV")
    p.add_argument("--step", type=float, default=1.0 / 12.0, help="common grid spacing (s)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("match-ratio", help="score a trajectory against the ideal spiral", formatter_class=fmt,
                       description="Fraction of ideal-spiral dots within half_thickness of the trajectory. "
                       + UNITS_NOTE)
    p.add_argument("--traj", required=True, help="trajectory CSV")
    p.add_argument("--pitch", type=float, default=0.15, help="ideal spiral pitch (mm)")
    p.add_argument("--radius", type=float, default=1.0, help="ideal spiral outer radius (mm)")
    p.add_argument("--dot-spacing", type=float, default=0.05, help="arc-length spacing of the dots (mm)")
    p.add_argument("--half-thickness", type=float, default=0.015, help="match tolerance (mm)")
    p.add_argument("--min-ratio", type=float, help="exit 1 when the ratio falls below this")
    p.set_defaults(func=cmd_match_ratio)

    p = sub.add_parser("plot", help="SVG plot of trajectories", formatter_class=fmt,
                       description="Write trajectories (x, y in mm) to a standalone SVG. " + UNITS_NOTE)
    p.add_argument("--traj", action="append", required=True, help="trajectory CSV (repeatable)")
    p.add_argument("--style", choices=("polyline", "dots"), default="polyline")
    p.add_argument("--title", default="", help="plot title")
    p.add_argument("--out", required=True, help="SVG file to write")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except RequirementViolation as exc:
        print(f"requirement violated: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConescanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
