"""Commanded scan paths and cam/motor speed programs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import ceil, pi

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import InputError, RequirementViolation
from .geometry import ConicProfile, DesignParams, RequirementSpec
from .kinematics import Trajectory, solve_deflection_many
from .reports import ConstraintReport, check_max, check_min

# Motor turns per cam turn for the 11:24 spur-gear pair.
GEAR_RATIO_MOTOR_PER_CAM = 24.0 / 11.0
DEFAULT_OMEGA_CAP = 3.0
DEFAULT_REWIND_DURATION = 8.0


@dataclass(frozen=True)
class Rewind:
    start: float
    duration: float
    omega: float


@dataclass(frozen=True, eq=False)
class CamProgram:
    """Piecewise-linear cam angular velocity setpoints (t in s, omega in rad/s)."""

    t: np.ndarray
    omega_cam: np.ndarray
    gear_ratio_motor_per_cam: float = GEAR_RATIO_MOTOR_PER_CAM
    rewind: Rewind | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        w = np.asarray(self.omega_cam, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or len(t) < 2:
            raise InputError("a cam program needs at least two (t, omega) setpoints")
        if np.any(np.diff(t) <= 0):
            raise InputError("setpoint times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(w))):
            raise InputError("setpoints must be finite")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "omega_cam", w)
        forward = t <= self.forward_end
        if np.any(w[forward] < 0):
            raise InputError("forward-phase cam speed must be non-negative")

    @property
    def omega_motor(self) -> np.ndarray:
        return self.omega_cam * self.gear_ratio_motor_per_cam

    @property
    def forward_end(self) -> float:
        return self.rewind.start if self.rewind is not None else float(self.t[-1])

    @property
    def forward_duration(self) -> float:
        return self.forward_end - float(self.t[0])

    def forward_turns(self) -> float:
        from .kinematics import integrate_program

        return float(integrate_program(self.t, self.omega_cam, [self.forward_end])[0]) / (2 * pi)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "omega_cam", "omega_motor"])
        for row in zip(self.t, self.omega_cam, self.omega_motor):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class ScanPlan:
    pattern: str
    pitch: float
    extent: float
    tip_speed: float
    trajectory: Trajectory

    @property
    def duration(self) -> float:
        return self.trajectory.duration


def _check_speed_and_pitch(tip_speed, pitch, req: RequirementSpec):
    if tip_speed > req.max_tip_speed:
        raise RequirementViolation("tip_speed", tip_speed, req.max_tip_speed)
    if pitch > req.max_pitch:
        raise RequirementViolation("pitch", pitch, req.max_pitch)


def spiral_arc_length(phi, pitch):
    """Arc length of rho = (pitch / 2 pi) phi from the centre to angle ``phi``."""
    c = pitch / (2 * pi)
    phi = np.asarray(phi, dtype=float)
    return 0.5 * c * (phi * np.sqrt(1 + phi * phi) + np.arcsinh(phi))


def spiral_angle_at_length(length, pitch):
    """Invert :func:`spiral_arc_length` (Newton from the large-angle guess)."""
    c = pitch / (2 * pi)
    length = np.asarray(length, dtype=float)
    phi = np.sqrt(2 * length / c)
    for _ in range(30):
        step = (spiral_arc_length(phi, pitch) - length) / (c * np.sqrt(1 + phi * phi))
        phi = np.maximum(phi - step, 0.0)
        if np.all(np.abs(step) < 1e-14 * np.maximum(1.0, phi)):
            break
    return phi


def _time_grid(total, dt):
    n = int(np.floor(total / dt + 1e-9))
    t = dt * np.arange(n + 1)
    if total - t[-1] > 1e-9 * max(1.0, total):
        t = np.append(t, total)
    return t


def plan_spiral(
    pitch: float,
    outer_radius: float,
    tip_speed: float,
    dt: float = 0.01,
    req: RequirementSpec = RequirementSpec(),
) -> ScanPlan:
    """Archimedean spiral from the centre to ``outer_radius`` at constant path speed."""
    if min(pitch, outer_radius, tip_speed, dt) <= 0:
        raise InputError("pitch, radius, speed and dt must be positive")
    _check_speed_and_pitch(tip_speed, pitch, req)
    phi_end = 2 * pi * outer_radius / pitch
    total = float(spiral_arc_length(phi_end, pitch)) / tip_speed
    t = _time_grid(total, dt)
    phi = spiral_angle_at_length(np.minimum(tip_speed * t, spiral_arc_length(phi_end, pitch)), pitch)
    phi[-1] = phi_end
    rho = pitch * phi / (2 * pi)
    traj = Trajectory(t, rho * np.cos(phi), rho * np.sin(phi), label="commanded spiral")
    return ScanPlan("spiral", pitch, outer_radius, tip_speed, traj)


def raster_vertices(line_pitch: float, width: float, height: float) -> np.ndarray:
    """Boustrophedon corner points, centred on the origin."""
    n_lines = int(ceil(height / line_pitch - 1e-9)) + 1
    ys = np.minimum(-height / 2 + line_pitch * np.arange(n_lines), height / 2)
    pts = []
    for i, y in enumerate(ys):
        x0, x1 = (-width / 2, width / 2) if i % 2 == 0 else (width / 2, -width / 2)
        pts.append((x0, y))
        pts.append((x1, y))
    return np.array(pts)


def plan_raster(
    line_pitch: float,
    width: float,
    height: float,
    tip_speed: float,
    dt: float = 0.01,
    req: RequirementSpec = RequirementSpec(),
) -> ScanPlan:
    """Boustrophedon raster with long strokes along x and sharp corners."""
    if min(line_pitch, width, height, tip_speed, dt) <= 0:
        raise InputError("pitch, dimensions, speed and dt must be positive")
    _check_speed_and_pitch(tip_speed, line_pitch, req)
    verts = raster_vertices(line_pitch, width, height)
    seg = np.hypot(*np.diff(verts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1] / tip_speed
    t = _time_grid(total, dt)
    arc = np.minimum(tip_speed * t, cum[-1])
    arc[-1] = cum[-1]
    traj = Trajectory(t, np.interp(arc, cum, verts[:, 0]), np.interp(arc, cum, verts[:, 1]), label="commanded raster")
    return ScanPlan("raster", line_pitch, max(width, height) / 2, tip_speed, traj)


def deflection_table(profile: ConicProfile, params: DesignParams, d_end: float, n: int = 4001):
    """Dense (phi, rho) table of the mechanism up to cam travel ``d_end``."""
    d = np.linspace(0.0, d_end, n)
    z = solve_deflection_many(d, profile, params, xtol=1e-12)
    return 2 * pi * d / params.eta, z


def travel_for_deflection(profile: ConicProfile, params: DesignParams, z_target: float) -> float:
    """Cam travel at which the mechanism deflects by ``z_target``."""
    def gap(d):
        return float(solve_deflection_many(d, profile, params, xtol=1e-13)[0]) - z_target

    hi = params.d_range
    while gap(hi) < 0:
        hi *= 1.05
    return brentq(gap, 0.0, hi, xtol=1e-12)


def constant_speed_cam_program(
    profile: ConicProfile,
    params: DesignParams = DesignParams(),
    tip_speed: float = 0.38,
    omega_cap: float = DEFAULT_OMEGA_CAP,
    dt: float = 0.01,
    req: RequirementSpec | None = None,
    rewind_duration: float = DEFAULT_REWIND_DURATION,
    gear_ratio: float = GEAR_RATIO_MOTOR_PER_CAM,
) -> CamProgram:
    """Cam speed program holding the tip path speed at ``tip_speed``.

    The required cam rate v / |d(tip)/d(phi)| diverges at the centre, so it is
    clamped to ``omega_cap``. The forward phase stops when the deflection
    reaches Z; a constant-speed rewind then returns the cam to phi = 0.
    """
    if req is None:
        req = RequirementSpec().scaled(params.scale)
    if min(tip_speed, omega_cap, dt, rewind_duration) <= 0:
        raise InputError("speed, cap, dt and rewind duration must be positive")
    if tip_speed > req.max_tip_speed:
        raise RequirementViolation("tip_speed", tip_speed, req.max_tip_speed)

    d_end = travel_for_deflection(profile, params, params.Z)
    phi_end = 2 * pi * d_end / params.eta
    phi_tab, rho_tab = deflection_table(profile, params, d_end * 1.02)
    spline = CubicSpline(phi_tab, rho_tab)
    dspline = spline.derivative()

    def omega_at(phi):
        gain = np.hypot(spline(phi), dspline(phi))
        return omega_cap if gain * omega_cap <= tip_speed else tip_speed / gain

    times = [0.0]
    omegas = [omega_at(0.0)]
    phi = 0.0
    max_steps = int(req.max_duration / dt) + 2
    for _ in range(max_steps):
        w0 = omegas[-1]
        # Trapezoidal step with a fixed-point corrector on the end rate.
        w1 = omega_at(phi + w0 * dt)
        for _ in range(3):
            w1 = omega_at(phi + 0.5 * (w0 + w1) * dt)
        nxt = phi + 0.5 * (w0 + w1) * dt
        if nxt >= phi_end:
            w_end = omega_at(phi_end)
            h = 2 * (phi_end - phi) / (w0 + w_end)
            times.append(times[-1] + h)
            omegas.append(w_end)
            phi = phi_end
            break
        times.append(times[-1] + dt)
        omegas.append(w1)
        phi = nxt
    else:
        raise RequirementViolation("scan_duration", times[-1], req.max_duration)
    if times[-1] > req.max_duration:
        raise RequirementViolation("scan_duration", times[-1], req.max_duration)

    t_fwd = times[-1]
    w_fwd = omegas[-1]
    # Rewind: ramp over one step to a constant reverse speed whose area
    # (ramp included) cancels the forward rotation exactly.
    ramp = dt
    omega_r = (-phi_end - 0.5 * w_fwd * ramp) / (rewind_duration - 0.5 * ramp)
    times += [t_fwd + ramp, t_fwd + rewind_duration]
    omegas += [omega_r, omega_r]
    return CamProgram(
        t=np.array(times),
        omega_cam=np.array(omegas),
        gear_ratio_motor_per_cam=gear_ratio,
        rewind=Rewind(start=t_fwd, duration=rewind_duration, omega=omega_r),
    )


def constant_cam_speed_program(turns: float, duration: float, gear_ratio: float = GEAR_RATIO_MOTOR_PER_CAM) -> CamProgram:
    """Cam turning at a fixed rate for ``turns`` revolutions (no rewind)."""
    if duration <= 0 or turns < 0:
        raise InputError("duration must be positive and turns non-negative")
    omega = 2 * pi * turns / duration
    return CamProgram(t=np.array([0.0, duration]), omega_cam=np.array([omega, omega]), gear_ratio_motor_per_cam=gear_ratio)


def _line_crossings(points, origin, direction):
    """Signed positions along a line where a polyline crosses it."""
    normal = np.array([-direction[1], direction[0]])
    rel = points - origin
    side = rel @ normal
    a, b = side[:-1], side[1:]
    idx = np.flatnonzero((a * b < 0) | ((a == 0) & (b != 0)))
    frac = a[idx] / (a[idx] - b[idx])
    p = rel[idx] + frac[:, None] * (rel[idx + 1] - rel[idx])
    return p @ direction


def max_line_spacing(traj: Trajectory, pattern: str = "spiral", n_lines: int = 360) -> float:
    """Largest gap between neighbouring scan lines.

    Spirals are probed along rays from the origin, rasters along vertical
    lines across the strokes.
    """
    pts = traj.points
    gaps = []
    if pattern == "spiral":
        for ang in np.linspace(0, 2 * pi, n_lines, endpoint=False):
            u = np.array([np.cos(ang), np.sin(ang)])
            pos = np.sort(_line_crossings(pts, np.zeros(2), u))
            pos = pos[pos > 0]
            if len(pos) > 1:
                gaps.append(np.max(np.diff(pos)))
    elif pattern == "raster":
        x0, x1 = traj.x.min(), traj.x.max()
        for x in np.linspace(x0, x1, n_lines + 2)[1:-1]:
            pos = np.sort(_line_crossings(pts, np.array([x, 0.0]), np.array([0.0, 1.0])))
            if len(pos) > 1:
                gaps.append(np.max(np.diff(pos)))
    else:
        raise InputError(f"unknown pattern {pattern!r}")
    return float(max(gaps)) if gaps else 0.0


def coverage_report(
    traj: Trajectory,
    fov_halfmin: float = 0.1,
    req: RequirementSpec = RequirementSpec(),
    pattern: str = "spiral",
) -> ConstraintReport:
    """Covered area (max radius plus half the field of view) and line spacing."""
    if len(traj) == 0:
        raise InputError("empty trajectory")
    radius = float(traj.radius.max()) + fov_halfmin
    area = pi * radius**2
    spacing = max_line_spacing(traj, pattern)
    return ConstraintReport(
        (
            check_min("covered_radius", radius, float(np.sqrt(req.min_area / pi)), "mm"),
            check_min("covered_area", area, req.min_area, "mm^2"),
            check_max("line_spacing", spacing, req.max_pitch, "mm"),
        )
    )
