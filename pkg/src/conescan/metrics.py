"""Scan quality metrics: probe/image mismatch, spiral match ratio, drag surrogate."""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, exp, pi, radians

import numpy as np

from .errors import InputError
from .kinematics import Trajectory
from .planning import spiral_angle_at_length, spiral_arc_length

# Imaging frame interval of the confocal system (12 frames/s).
FRAME_INTERVAL = 1.0 / 12.0

# A slipping image point re-sticks only if the probe turns away from the
# image's direction of motion by more than this angle within one step.
STICK_TURN_ANGLE_DEG = 45.0


@dataclass(frozen=True)
class MismatchReport:
    D: float
    C: float
    t_f: float
    n_samples: int

    def to_text(self) -> str:
        return f"D = {self.D:.6f} mm\nC = {self.C:.6f} mm/s\nt_f = {self.t_f:.3f} s ({self.n_samples} samples)"


@dataclass(frozen=True)
class MatchRatioReport:
    ratio: float
    matched: int
    mismatched: int
    irrelevant: int
    half_thickness: float

    def to_text(self) -> str:
        return (
            f"match ratio = {self.ratio:.4f} "
            f"({self.matched} matched, {self.mismatched} outside, {self.irrelevant} irrelevant; "
            f"half thickness {self.half_thickness:g} mm)"
        )


@dataclass(frozen=True)
class DragSurrogateParams:
    """Toy stick-slip tissue model, not a physical constitutive law.

    ``stick_radius`` is the dead zone in mm, ``lag_time`` the first-order
    recovery constant in s and ``creep_gain`` in [0, 1] scales how much of
    the remaining gap is recovered per step.
    """

    stick_radius: float = 0.05
    lag_time: float = 0.01
    creep_gain: float = 1.0

    def __post_init__(self):
        if self.stick_radius < 0:
            raise InputError("stick_radius must be non-negative")
        if not self.lag_time > 0:
            raise InputError("lag_time must be positive")
        if not 0.0 <= self.creep_gain <= 1.0:
            raise InputError("creep_gain must lie in [0, 1]")


def resample(traj: Trajectory, grid) -> Trajectory:
    """Linear interpolation of ``traj`` onto the time ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if len(traj) == 0 or len(grid) == 0:
        raise InputError("cannot resample an empty trajectory or onto an empty grid")
    tol = 1e-9 * max(1.0, abs(traj.t[-1]))
    if grid[0] < traj.t[0] - tol or grid[-1] > traj.t[-1] + tol:
        raise InputError(
            f"grid [{grid[0]:g}, {grid[-1]:g}] outside trajectory span [{traj.t[0]:g}, {traj.t[-1]:g}]"
        )
    return Trajectory(grid, np.interp(grid, traj.t, traj.x), np.interp(grid, traj.t, traj.y), traj.label, traj.scale)


def common_grid(a: Trajectory, b: Trajectory, step: float = FRAME_INTERVAL) -> np.ndarray:
    """Uniform grid over the overlap of two trajectories with spacing <= ``step``."""
    t0 = max(a.t[0], b.t[0])
    t1 = min(a.t[-1], b.t[-1])
    if not t1 > t0:
        raise InputError("trajectories do not overlap in time")
    n = max(1, int(np.ceil((t1 - t0) / step - 1e-9)))
    return np.linspace(t0, t1, n + 1)


def _on_grid(image, probe, step):
    grid = common_grid(image, probe, step)
    return grid, resample(image, grid).points, resample(probe, grid).points


def mismatch_D(image: Trajectory, probe: Trajectory, step: float = FRAME_INTERVAL) -> float:
    """Time-averaged distance between image and probe positions (mm)."""
    grid, pi_, pp = _on_grid(image, probe, step)
    dist = np.linalg.norm(pi_ - pp, axis=1)
    return float(np.trapezoid(dist, grid) / (grid[-1] - grid[0]))


def mismatch_C(image: Trajectory, probe: Trajectory, step: float = FRAME_INTERVAL) -> float:
    """Time-averaged magnitude of the velocity difference (mm/s)."""
    grid, pi_, pp = _on_grid(image, probe, step)
    if len(grid) < 3:
        raise InputError("velocity mismatch needs at least three common samples")
    h = grid[1] - grid[0]
    dv = np.gradient(pi_ - pp, h, axis=0)
    return float(np.trapezoid(np.linalg.norm(dv, axis=1), grid) / (grid[-1] - grid[0]))


def mismatch_report(image: Trajectory, probe: Trajectory, step: float = FRAME_INTERVAL) -> MismatchReport:
    grid = common_grid(image, probe, step)
    return MismatchReport(
        D=mismatch_D(image, probe, step),
        C=mismatch_C(image, probe, step),
        t_f=float(grid[-1] - grid[0]),
        n_samples=len(grid),
    )


def ideal_spiral_dots(pitch: float, outer_radius: float, dot_spacing: float) -> np.ndarray:
    """Points on rho = (pitch / 2 pi) phi at uniform arc-length spacing."""
    phi_end = 2 * pi * outer_radius / pitch
    lengths = np.arange(0.0, float(spiral_arc_length(phi_end, pitch)) + 1e-12, dot_spacing)
    phi = spiral_angle_at_length(lengths, pitch)
    rho = pitch * phi / (2 * pi)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])


def distance_to_polyline(points, vertices, chunk: int = 256) -> np.ndarray:
    """Euclidean distance from each point to the nearest polyline segment."""
    points = np.asarray(points, dtype=float)
    a = vertices[:-1]
    ab = vertices[1:] - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2_safe = np.where(ab2 > 0, ab2, 1.0)
    out = np.empty(len(points))
    for start in range(0, len(points), chunk):
        p = points[start : start + chunk, None, :]
        ap = p - a[None]
        u = np.clip(np.einsum("pij,ij->pi", ap, ab) / ab2_safe, 0.0, 1.0)
        u = np.where(ab2 > 0, u, 0.0)
        diff = ap - u[..., None] * ab[None]
        out[start : start + chunk] = np.sqrt(np.min(np.einsum("pij,pij->pi", diff, diff), axis=1))
    return out


def match_ratio(
    traj: Trajectory,
    pitch: float,
    outer_radius: float,
    dot_spacing: float = 0.05,
    half_thickness: float = 0.015,
) -> MatchRatioReport:
    """Fraction of ideal-spiral dots lying within ``half_thickness`` of ``traj``.

    Dots farther from the centre than the trajectory ever reaches are
    irrelevant and left out of the ratio; on a spiral this is the part of
    the reference the scan never got to.
    """
    if min(pitch, outer_radius, dot_spacing, half_thickness) <= 0:
        raise InputError("match-ratio parameters must be positive")
    pts = traj.points
    if len(pts) < 2 or np.all(np.ptp(pts, axis=0) == 0):
        raise InputError("trajectory is degenerate (a single point)")
    dots = ideal_spiral_dots(pitch, outer_radius, dot_spacing)
    reach = float(traj.radius.max()) * (1 + 1e-12)
    relevant = np.hypot(dots[:, 0], dots[:, 1]) <= reach
    dist = distance_to_polyline(dots[relevant], pts)
    matched = int(np.count_nonzero(dist <= half_thickness))
    mismatched = int(relevant.sum()) - matched
    total = matched + mismatched
    return MatchRatioReport(
        ratio=matched / total if total else 0.0,
        matched=matched,
        mismatched=mismatched,
        irrelevant=int((~relevant).sum()),
        half_thickness=half_thickness,
    )


def apply_drag_surrogate(probe: Trajectory, p: DragSurrogateParams = DragSurrogateParams()) -> Trajectory:
    """Synthesise an image trajectory from a probe trajectory.

    The image point starts under the probe and stays put (tissue dragged
    along) while the probe is within ``stick_radius`` of it. Once the probe
    breaks away, the offset at breakaway is frozen and the image relaxes
    toward ``probe - offset`` with a first-order lag. A slipping image sticks
    again only when the probe is back inside the dead zone and has turned
    sharply away from the image's direction of travel (corners, reversals);
    smooth curves keep slipping.
    """
    P = probe.points
    n = len(P)
    I = np.empty_like(P)
    if n == 0:
        return Trajectory(probe.t, probe.x, probe.y, "image", probe.scale)
    I[0] = P[0]
    delta = p.stick_radius
    cos_turn = cos(radians(STICK_TURN_ANGLE_DEG))
    dts = np.diff(probe.t)
    offset = np.zeros(2)
    stuck = True
    v_image = np.zeros(2)
    for k in range(1, n):
        gap = P[k] - I[k - 1]
        dist = float(np.hypot(gap[0], gap[1]))
        step = P[k] - P[k - 1]
        if stuck:
            if dist > delta:
                stuck = False
                offset = gap * (delta / dist)
        else:
            norm = float(np.hypot(*v_image) * np.hypot(*step))
            sharp = norm > 0 and float(v_image @ step) < cos_turn * norm
            if dist <= delta and sharp:
                stuck = True
        if stuck:
            I[k] = I[k - 1]
        else:
            beta = p.creep_gain * (1.0 - exp(-dts[k - 1] / p.lag_time))
            I[k] = I[k - 1] + beta * (P[k] - offset - I[k - 1])
            v_image = I[k] - I[k - 1]
    return Trajectory(probe.t, I[:, 0], I[:, 1], "image", probe.scale)
