"""Closed-form contact geometry of the cam-on-cone mechanism.

The conic structure pivots about O; the cam tip, pushed forward by ``d``
along the axis, touches the conic face at abscissa ``s`` and height ``f``
(measured in the cone's own frame). The probe tip P sits at distance ``r``
from O and is deflected radially by ``z = r sin(theta)``.

All lengths are millimetres. Angles are radians unless a name says ``_deg``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from math import asin, cos, degrees, isfinite, pi, sqrt
from typing import NamedTuple

import numpy as np

from .errors import GeometryDomainError, InputError

# Inner radius of the 5 mm covering tube at unity scale.
TUBE_INNER_RADIUS = 2.5

# Tolerance used by the geometry identities (mm).
GEOMETRY_TOL = 1e-9


@dataclass(frozen=True)
class DesignParams:
    """Fixed mechanism constants.

    ``l`` cable half-offset, ``k`` cam axial reference length, ``r`` lever arm
    pivot-to-tip, ``alpha`` spiral pitch, ``eta`` cam travel per revolution,
    ``Z`` upper bound of the design deflection range. Lengths are the actual
    (already scaled) values; ``scale`` records the factor relative to unity.
    """

    l: float = 1.4
    k: float = 7.0
    r: float = 20.0
    alpha: float = 0.15
    eta: float = 0.5
    Z: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        for name in ("l", "k", "r", "alpha", "eta", "scale"):
            value = getattr(self, name)
            if not (isfinite(value) and value > 0):
                raise InputError(f"{name} must be finite and > 0, got {value!r}")
        # Z = 0 is accepted as a degenerate design (nothing to scan).
        if not (isfinite(self.Z) and self.Z >= 0):
            raise InputError(f"Z must be finite and >= 0, got {self.Z!r}")
        if self.alpha >= self.eta:
            raise InputError("alpha must be smaller than eta")
        if self.Z >= self.r:
            raise InputError("Z must be smaller than r")

    @property
    def gain(self) -> float:
        """Target deflection per unit cam travel, alpha/eta."""
        return self.alpha / self.eta

    @property
    def d_range(self) -> float:
        """Cam travel that should produce the full deflection Z."""
        return self.Z * self.eta / self.alpha

    @property
    def tube_radius(self) -> float:
        return TUBE_INNER_RADIUS * self.scale

    def scaled(self, factor: float) -> "DesignParams":
        """Uniformly scale every length by ``factor``."""
        if factor <= 0:
            raise InputError("scale factor must be positive")
        return DesignParams(
            l=self.l * factor,
            k=self.k * factor,
            r=self.r * factor,
            alpha=self.alpha * factor,
            eta=self.eta * factor,
            Z=self.Z * factor,
            scale=self.scale * factor,
        )

    def to_mapping(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: dict) -> "DesignParams":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise InputError(f"unknown design keys: {', '.join(sorted(unknown))}")
        return cls(**{key: float(v) for key, v in values.items()})


@dataclass(frozen=True)
class RequirementSpec:
    """Imaging and mechanical requirements for a scan (unity-scale defaults)."""

    max_tip_speed: float = 0.5
    target_pitch: float = 0.15
    max_pitch: float = 0.2
    min_area: float = 3.0
    max_duration: float = 180.0
    target_duration: float = 60.0
    max_height_change: float = 0.1
    max_inclination_deg: float = 5.0
    hard_max_inclination_deg: float = 10.0
    nominal_tip_distance: float = 0.2
    max_tip_distance: float = 0.3

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isfinite(value) and value >= 0):
                raise InputError(f"{f.name} must be finite and >= 0, got {value!r}")
        pairs = [
            ("target_pitch", "max_pitch"),
            ("target_duration", "max_duration"),
            ("max_inclination_deg", "hard_max_inclination_deg"),
            ("nominal_tip_distance", "max_tip_distance"),
        ]
        for target, limit in pairs:
            if getattr(self, target) > getattr(self, limit):
                raise InputError(f"{target} exceeds {limit}")

    def scaled(self, factor: float) -> "RequirementSpec":
        """Requirements for a geometrically scaled prototype.

        Lengths and speeds grow linearly, areas quadratically; angles and
        durations are unchanged.
        """
        return replace(
            self,
            max_tip_speed=self.max_tip_speed * factor,
            target_pitch=self.target_pitch * factor,
            max_pitch=self.max_pitch * factor,
            min_area=self.min_area * factor**2,
            max_height_change=self.max_height_change * factor,
            nominal_tip_distance=self.nominal_tip_distance * factor,
            max_tip_distance=self.max_tip_distance * factor,
        )

    def to_mapping(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: dict) -> "RequirementSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise InputError(f"unknown requirement keys: {', '.join(sorted(unknown))}")
        return cls(**{key: float(v) for key, v in values.items()})


@dataclass(frozen=True)
class ConicProfile:
    """Quadratic cross-section of the conic face, f'(s) = A s^2 + B s + C.

    ``s_min`` .. ``s_max`` is the abscissa range the profile is trusted on;
    ``f_max`` is the profile height at ``s_max`` (the cone's outer extent).
    """

    A: float
    B: float
    C: float
    s_max: float
    f_max: float
    s_min: float = 0.0

    def __post_init__(self):
        for name in ("A", "B", "C", "s_max", "f_max", "s_min"):
            if not isfinite(getattr(self, name)):
                raise InputError(f"profile coefficient {name} is not finite")
        if self.s_max <= 0 or self.s_min < 0 or self.s_min > self.s_max:
            raise InputError("profile validity range must satisfy 0 <= s_min <= s_max, s_max > 0")

    def __call__(self, s):
        return (self.A * s + self.B) * s + self.C

    def slope(self, s):
        return 2.0 * self.A * s + self.B

    def is_monotone(self) -> bool:
        """Non-decreasing on [0, s_max] (a parabola's slope is linear in s)."""
        return self.slope(0.0) >= 0 and self.slope(self.s_max) >= 0

    def scaled(self, factor: float) -> "ConicProfile":
        """Profile of the same cone with every length multiplied by ``factor``."""
        return ConicProfile(
            A=self.A / factor,
            B=self.B,
            C=self.C * factor,
            s_max=self.s_max * factor,
            f_max=self.f_max * factor,
            s_min=self.s_min * factor,
        )

    def to_mapping(self) -> dict:
        return asdict(self)

    @classmethod
    def from_mapping(cls, values: dict) -> "ConicProfile":
        required = {"A", "B", "C", "s_max"}
        missing = required - set(values)
        if missing:
            raise InputError(f"profile is missing keys: {', '.join(sorted(missing))}")
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise InputError(f"unknown profile keys: {', '.join(sorted(unknown))}")
        vals = {key: float(v) for key, v in values.items()}
        if "f_max" not in vals:
            s = vals["s_max"]
            vals["f_max"] = (vals["A"] * s + vals["B"]) * s + vals["C"]
        return cls(**vals)


@dataclass(frozen=True)
class ContactGeometry:
    d: float
    z: float
    e: float
    gamma: float
    theta: float
    s: float
    f: float


@dataclass(frozen=True)
class TipPose:
    z: float
    height: float
    inclination_deg: float


class ProfileValue(NamedTuple):
    value: float
    extrapolated: bool


def contact_sf(z, d, params: DesignParams):
    """Vectorised contact abscissa and height, no domain checks.

    Returns ``(s, f, theta, e, gamma)``; callers are responsible for keeping
    ``z`` in [0, r] and the square-root argument non-negative.
    """
    e = np.hypot(d + params.k, params.l)
    gamma = np.arcsin(params.l / e)
    theta = np.arcsin(z / params.r)
    s = e * np.sin(theta + gamma) - params.l
    f = np.sqrt(e * e - (params.l + s) ** 2) - params.k
    return s, f, theta, e, gamma


def contact_from_deflection(z: float, d: float, params: DesignParams = DesignParams()) -> ContactGeometry:
    """Solve the contact triangle for deflection ``z`` and cam travel ``d``."""
    if not 0.0 <= z <= params.r:
        raise GeometryDomainError(f"deflection z={z!r} outside [0, r={params.r}]")
    if d < 0:
        raise GeometryDomainError(f"cam travel d={d!r} must be non-negative")
    e = sqrt((d + params.k) ** 2 + params.l**2)
    gamma = asin(params.l / e)
    theta = asin(z / params.r)
    s = e * np.sin(theta + gamma) - params.l
    radicand = e * e - (params.l + s) ** 2
    # radicand = (e cos(theta + gamma))^2, so it only goes negative through
    # round-off; past theta + gamma = pi/2 the root picks the wrong sign.
    if radicand < 0 or theta + gamma > pi / 2:
        raise GeometryDomainError(
            f"no contact height for z={z!r}, d={d!r}: cone face would pass the cam tip"
        )
    f = sqrt(radicand) - params.k
    return ContactGeometry(d=d, z=z, e=e, gamma=gamma, theta=theta, s=float(s), f=f)


def target_deflection(d, params: DesignParams = DesignParams()):
    """Deflection that keeps the spiral Archimedean: z = (alpha/eta) d."""
    return params.gain * d


def profile_eval(s: float, profile: ConicProfile) -> ProfileValue:
    value = float(profile(s))
    extrapolated = not (0.0 <= s <= profile.s_max)
    return ProfileValue(value, extrapolated)


def radial_margin(z, params: DesignParams = DesignParams(), tube_radius: float | None = None):
    """Clearance between the cone rim and the tube wall at deflection ``z``.

    The cone is evaluated at the cam travel the linear law prescribes for
    ``z``. A negative result means the cone would hit the tube.
    """
    if tube_radius is None:
        tube_radius = params.tube_radius
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0) or np.any(z_arr > params.r):
        raise GeometryDomainError(f"deflection outside [0, r={params.r}]")
    d = z_arr * params.eta / params.alpha
    s, f, theta, _, _ = contact_sf(z_arr, d, params)
    if np.any(np.isnan(f)):
        raise GeometryDomainError("contact geometry undefined inside the requested range")
    u = tube_radius - (2.0 * (s + params.l) * np.cos(theta) - params.l)
    return float(u) if u.ndim == 0 else u


def tip_pose(z: float, params: DesignParams = DesignParams()) -> TipPose:
    if not 0.0 <= z <= params.r:
        raise GeometryDomainError(f"deflection z={z!r} outside [0, r={params.r}]")
    theta = asin(z / params.r)
    return TipPose(z=z, height=params.r * (1.0 - cos(theta)), inclination_deg=degrees(theta))


def cam_travel(phi, params: DesignParams = DesignParams()):
    """Screw relation: cam travel for cumulative cam rotation ``phi`` (rad)."""
    return params.eta * np.asarray(phi) / (2.0 * pi)
