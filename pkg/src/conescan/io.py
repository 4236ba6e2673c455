"""Plain-text codecs: key-value configs, trajectory and cam-program CSV."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import InputError
from .geometry import ConicProfile, DesignParams, RequirementSpec
from .kinematics import Trajectory
from .planning import CamProgram, Rewind

DESIGN_HEADER = "# design parameters: lengths in mm, scale dimensionless"
PROFILE_HEADER = "# cone profile f'(s) = A s^2 + B s + C; A in 1/mm, B dimensionless, C, s_min, s_max, f_max in mm"
REQUIREMENT_HEADER = "# requirements: mm, mm/s, mm^2, s, deg"


def parse_config(text: str, source: str = "<config>") -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise InputError(f"{source}:{lineno}: missing key")
        if key in values:
            raise InputError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise InputError(f"{source}:{lineno}: value for {key!r} is not a number: {value!r}") from None
    return values


def format_config(values: dict[str, float], header: str = "") -> str:
    lines = [header] if header else []
    lines += [f"{key} = {float(value)!r}" for key, value in values.items()]
    return "\n".join(lines) + "\n"


def read_config(path) -> dict[str, float]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def load_design(path, extra_keys=("tube_radius",)) -> tuple[DesignParams, dict[str, float]]:
    """Design parameters plus any recognised extra keys (e.g. a tube-radius override)."""
    values = read_config(path)
    extras = {key: values.pop(key) for key in extra_keys if key in values}
    return DesignParams.from_mapping(values), extras


def save_design(params: DesignParams, path) -> None:
    Path(path).write_text(format_config(params.to_mapping(), DESIGN_HEADER))


def load_profile(path) -> ConicProfile:
    return ConicProfile.from_mapping(read_config(path))


def save_profile(profile: ConicProfile, path) -> None:
    Path(path).write_text(format_config(profile.to_mapping(), PROFILE_HEADER))


def load_requirements(path) -> RequirementSpec:
    return RequirementSpec.from_mapping(read_config(path))


def save_requirements(req: RequirementSpec, path) -> None:
    Path(path).write_text(format_config(req.to_mapping(), REQUIREMENT_HEADER))


def trajectory_to_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x", "y"])
    for row in zip(traj.t.tolist(), traj.x.tolist(), traj.y.tolist()):
        w.writerow([repr(v) for v in row])
    return buf.getvalue()


def _read_columns(text: str, expected: list[str], source: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise InputError(f"{source}: empty file")
    header = [cell.strip() for cell in rows[0]]
    if header[: len(expected)] != expected:
        raise InputError(f"{source}: expected header {','.join(expected)}, got {','.join(header)}")
    try:
        data = np.array([[float(c) for c in r[: len(expected)]] for r in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InputError(f"{source}: {exc}") from None
    if len(rows) > 1 and data.shape[1] != len(expected):
        raise InputError(f"{source}: rows must have {len(expected)} columns")
    return data.reshape(-1, len(expected))


def trajectory_from_csv(text: str, label: str = "", source: str = "<csv>") -> Trajectory:
    data = _read_columns(text, ["t", "x", "y"], source)
    return Trajectory(data[:, 0], data[:, 1], data[:, 2], label=label)


def write_trajectory(traj: Trajectory, path) -> None:
    Path(path).write_text(trajectory_to_csv(traj))


def read_trajectory(path, label: str | None = None) -> Trajectory:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return trajectory_from_csv(text, label=path.stem if label is None else label, source=str(path))


def cam_program_from_csv(text: str, source: str = "<csv>") -> CamProgram:
    """Inverse of :meth:`CamProgram.to_csv`.

    The rewind phase is recognised as the trailing block of negative cam
    speeds; its start is the last non-negative setpoint before it.
    """
    data = _read_columns(text, ["t", "omega_cam", "omega_motor"], source)
    t, w, wm = data.T
    nz = np.flatnonzero(w != 0)
    ratio = float(wm[nz[0]] / w[nz[0]]) if len(nz) else 24.0 / 11.0
    neg = np.flatnonzero(w < 0)
    rewind = None
    if len(neg):
        first = int(neg[0])
        if first == 0 or np.any(w[first:] >= 0):
            raise InputError(f"{source}: negative cam speed outside a trailing rewind block")
        start = float(t[first - 1])
        rewind = Rewind(start=start, duration=float(t[-1] - start), omega=float(w[-1]))
    return CamProgram(t=t, omega_cam=w, gear_ratio_motor_per_cam=ratio, rewind=rewind)


def write_cam_program(program: CamProgram, path) -> None:
    Path(path).write_text(program.to_csv())


def read_cam_program(path) -> CamProgram:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return cam_program_from_csv(text, str(path))
