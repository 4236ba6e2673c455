"""Fitting the quadratic cone profile and checking the resulting design."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import pi

import numpy as np
from scipy.optimize import brentq

from .errors import GeometryDomainError, InputError, SingularFitError
from .geometry import (
    ConicProfile,
    DesignParams,
    RequirementSpec,
    contact_sf,
    radial_margin,
    tip_pose,
)
from .kinematics import solve_deflection_many
from .reports import ConstraintReport, check_max, check_min

# Fit rejected when the normal matrix is this badly conditioned.
MAX_NORMAL_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class FitSampleSet:
    """Design-path samples (z_i, d_i) with their exact contact points (s_i, f_i)."""

    z: np.ndarray
    d: np.ndarray
    s: np.ndarray
    f: np.ndarray
    params: DesignParams

    @property
    def count(self) -> int:
        return len(self.z)

    @property
    def pairs(self) -> list[tuple[float, float, float, float]]:
        return [tuple(map(float, row)) for row in zip(self.z, self.d, self.s, self.f)]

    @classmethod
    def from_deflections(cls, z, params: DesignParams) -> "FitSampleSet":
        z = np.asarray(z, dtype=float)
        if np.any(z < 0) or np.any(z > params.r):
            raise GeometryDomainError("sample deflection outside [0, r]")
        d = z * params.eta / params.alpha
        s, f, *_ = contact_sf(z, d, params)
        if np.any(np.isnan(f)):
            raise GeometryDomainError("contact geometry undefined at a sample")
        return cls(z=z, d=d, s=s, f=f, params=params)


@dataclass(frozen=True, eq=False)
class LinearityReport:
    max_abs_residual: float
    residual_curve: np.ndarray  # columns: d, z(d) - (alpha/eta) d
    in_range: bool
    d_range: tuple[float, float]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "residual"])
        for d, res in self.residual_curve:
            w.writerow([repr(float(d)), repr(float(res))])
        return buf.getvalue()

    def to_text(self) -> str:
        lo, hi = self.d_range
        return (
            f"linearity over d in [{lo:.4f}, {hi:.4f}] mm: "
            f"max |z - (alpha/eta) d| = {self.max_abs_residual:.6f} mm"
            f"{'' if self.in_range else ' (grid extends beyond the design range)'}"
        )


def generate_fit_samples(params: DesignParams = DesignParams(), n: int = 6, per_turn: bool = False) -> FitSampleSet:
    """Equally spaced samples along the linear design law.

    By default z_i = i Z / n for i = 1..n. With ``per_turn`` the samples sit
    one cam revolution apart instead (d_i = i eta, z_i = i alpha).
    """
    if n < 3:
        raise InputError("at least three fit samples are required")
    i = np.arange(1, n + 1, dtype=float)
    z = i * params.alpha if per_turn else i * params.Z / n
    return FitSampleSet.from_deflections(z, params)


def margin_limit_deflection(params: DesignParams, tube_radius: float | None = None) -> float:
    """Deflection at which the cone rim would touch the tube wall."""
    def margin(z):
        return radial_margin(z, params, tube_radius)

    hi = 0.99 * params.r
    if margin(0.0) <= 0:
        return 0.0
    if margin(hi) > 0:
        return hi
    return brentq(margin, 0.0, hi, xtol=1e-12)


def _least_squares_quadratic(s, f):
    s = np.asarray(s, dtype=float)
    f = np.asarray(f, dtype=float)
    if len(s) < 3 or len(np.unique(s)) < 3:
        raise SingularFitError("need at least three distinct abscissae")
    V = np.column_stack([s * s, s, np.ones_like(s)])
    normal = V.T @ V
    if np.linalg.cond(normal) > MAX_NORMAL_CONDITION:
        raise SingularFitError("normal equations are ill-conditioned")
    return np.linalg.solve(normal, V.T @ f)


def fit_profile(samples: FitSampleSet, tube_radius: float | None = None) -> ConicProfile:
    """Least-squares quadratic through the sampled contact points.

    The validity range runs from the smallest sample abscissa up to the
    abscissa at which the radial margin to the tube vanishes.
    """
    A, B, C = _least_squares_quadratic(samples.s, samples.f)
    params = samples.params
    z_limit = margin_limit_deflection(params, tube_radius)
    s_limit, *_ = contact_sf(z_limit, z_limit * params.eta / params.alpha, params)
    s_max = float(max(s_limit, samples.s.max()))
    f_max = float((A * s_max + B) * s_max + C)
    return ConicProfile(A=float(A), B=float(B), C=float(C), s_max=s_max, f_max=f_max, s_min=float(samples.s.min()))


def sum_squared_error(profile_or_coeffs, samples: FitSampleSet) -> float:
    if isinstance(profile_or_coeffs, ConicProfile):
        coeffs = (profile_or_coeffs.A, profile_or_coeffs.B, profile_or_coeffs.C)
    else:
        coeffs = profile_or_coeffs
    A, B, C = coeffs
    return float(np.sum(((A * samples.s + B) * samples.s + C - samples.f) ** 2))


def working_range(profile: ConicProfile, params: DesignParams) -> tuple[float, float]:
    """Cam-travel interval over which the profile was fitted.

    Starts where the design path reaches the first fit abscissa and ends at
    the design travel for Z.
    """
    d_hi = params.d_range
    if profile.s_min <= 0:
        return 0.0, d_hi

    def s_gap(z):
        s, *_ = contact_sf(z, z * params.eta / params.alpha, params)
        return float(s) - profile.s_min

    if s_gap(params.Z) <= 0:
        return d_hi, d_hi
    z_lo = brentq(s_gap, 0.0, params.Z, xtol=1e-13)
    return z_lo * params.eta / params.alpha, d_hi


def linearity_report(
    profile: ConicProfile,
    params: DesignParams = DesignParams(),
    n_grid: int = 201,
    d_range: tuple[float, float] | None = None,
    extend: float = 1.0,
) -> LinearityReport:
    """Closed-loop deviation of the mechanism from the linear law.

    ``d_range`` defaults to the fitted working range; ``extend`` stretches its
    upper end (1.3 probes 30 % past the design travel).
    """
    if n_grid < 10:
        raise InputError("n_grid must be at least 10")
    lo, hi = d_range if d_range is not None else working_range(profile, params)
    hi = hi * extend
    d = np.linspace(lo, hi, n_grid)
    z_hi = max(1.2 * params.Z, 1.2 * params.gain * hi)
    z = solve_deflection_many(d, profile, params, z_hi=z_hi)
    residual = z - params.gain * d
    in_range = bool(hi <= params.d_range * (1 + 1e-12))
    return LinearityReport(
        max_abs_residual=float(np.max(np.abs(residual))),
        residual_curve=np.column_stack([d, residual]),
        in_range=in_range,
        d_range=(float(lo), float(hi)),
    )


def validate_design(
    profile: ConicProfile,
    params: DesignParams = DesignParams(),
    req: RequirementSpec = RequirementSpec(),
    tube_radius: float | None = None,
    fov_halfmin: float | None = None,
    n_grid: int = 201,
) -> ConstraintReport:
    """Worst-case requirement checks over z in [0, Z]."""
    z = np.linspace(0.0, params.Z, n_grid)
    poses = [tip_pose(float(zi), params) for zi in z]
    height = max(p.height for p in poses)
    inclination = max(p.inclination_deg for p in poses)
    margin = float(np.min(radial_margin(z, params, tube_radius)))
    if fov_halfmin is None:
        fov_halfmin = 0.1 * params.scale
    area = pi * (params.Z + fov_halfmin) ** 2
    s_needed, *_ = contact_sf(params.Z, params.d_range, params)
    checks = (
        check_max("tip_height_change", height, req.max_height_change, "mm"),
        check_max("inclination", inclination, req.max_inclination_deg, "deg"),
        check_max("inclination_hard_limit", inclination, req.hard_max_inclination_deg, "deg"),
        check_min("radial_margin", margin, 0.0, "mm", strict=True),
        check_max("pitch", params.alpha, req.max_pitch, "mm"),
        check_min("covered_area", area, req.min_area, "mm^2"),
        check_min("profile_extent", profile.s_max, float(s_needed), "mm"),
    )
    return ConstraintReport(checks)
