from math import hypot, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conescan import (
    DragSurrogateParams,
    InputError,
    Trajectory,
    apply_drag_surrogate,
    constant_speed_cam_program,
    match_ratio,
    mismatch_C,
    mismatch_D,
    mismatch_report,
    plan_raster,
    plan_spiral,
    resample,
    simulate_scan,
)
from conescan.metrics import FRAME_INTERVAL, distance_to_polyline, ideal_spiral_dots
from oracles import oracle_D_C


def random_trajectory(rng, n=None, span=10.0):
    n = n or int(rng.integers(20, 200))
    t = np.sort(rng.uniform(0.0, span, n))
    t[0], t[-1] = 0.0, span
    t = np.unique(t)
    xy = np.cumsum(rng.normal(0.0, 0.05, (len(t), 2)), axis=0)
    return Trajectory(t, xy[:, 0], xy[:, 1])


@pytest.mark.parametrize("seed", range(10))
def test_D_C_against_discrete_sum_oracle(seed):
    rng = np.random.default_rng(seed)
    a = random_trajectory(rng)
    b = random_trajectory(rng)
    D_ref, C_ref = oracle_D_C(a, b)
    assert mismatch_D(a, b) == pytest.approx(D_ref, abs=1e-6)
    assert mismatch_C(a, b) == pytest.approx(C_ref, abs=1e-6)


def test_drag_surrogate_case_against_oracle():
    probe = plan_raster(0.15, 1.0, 1.0, 0.38, dt=0.01).trajectory
    image = apply_drag_surrogate(probe, DragSurrogateParams(stick_radius=0.05))
    D_ref, C_ref = oracle_D_C(image, probe)
    assert mismatch_D(image, probe) == pytest.approx(D_ref, abs=1e-6)
    assert mismatch_C(image, probe) == pytest.approx(C_ref, abs=1e-6)


def test_identical_is_zero():
    rng = np.random.default_rng(3)
    a = random_trajectory(rng)
    rep = mismatch_report(a, a)
    assert rep.D == 0.0 and rep.C == 0.0
    assert rep.t_f == pytest.approx(10.0)


def test_constant_offset():
    rng = np.random.default_rng(4)
    a = random_trajectory(rng)
    b = Trajectory(a.t, a.x + 0.2, a.y)
    assert mismatch_D(a, b) == pytest.approx(0.2, abs=1e-12)
    assert mismatch_C(a, b) == pytest.approx(0.0, abs=1e-9)
    w = np.array([0.3, -0.4])
    c = Trajectory(a.t, a.x + w[0], a.y + w[1])
    assert mismatch_D(a, c) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(-1, 1), st.floats(-1, 1))
def test_metric_properties(seed, wx, wy):
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 5.0, 61)
    tr = [Trajectory(t, *np.cumsum(rng.normal(0, 0.05, (2, 61)), axis=1)) for _ in range(3)]
    a, b, c = tr
    for f in (mismatch_D, mismatch_C):
        assert f(a, b) == pytest.approx(f(b, a), abs=1e-12)
        assert f(a, b) >= 0
        assert f(a, c) <= f(a, b) + f(b, c) + 1e-12
    shifted = Trajectory(b.t, b.x + wx, b.y + wy)
    assert mismatch_C(a, shifted) == pytest.approx(mismatch_C(a, b), abs=1e-9)
    assert abs(mismatch_D(a, shifted) - mismatch_D(a, b)) <= hypot(wx, wy) + 1e-12


def test_grid_refinement_smooth():
    t = np.linspace(0.0, 20.0, 2001)
    a = Trajectory(t, np.cos(0.5 * t), np.sin(0.3 * t))
    b = Trajectory(t, 0.8 * np.cos(0.5 * t + 0.2), np.sin(0.3 * t) + 0.1)
    for f in (mismatch_D, mismatch_C):
        coarse, fine = f(a, b, step=FRAME_INTERVAL), f(a, b, step=FRAME_INTERVAL / 2)
        assert abs(coarse - fine) < 0.01 * fine


def test_mismatch_errors():
    a = Trajectory([0.0, 1.0], [0, 1], [0, 0])
    b = Trajectory([2.0, 3.0], [0, 1], [0, 0])
    with pytest.raises(InputError):
        mismatch_D(a, b)
    with pytest.raises(InputError):
        mismatch_C(a, Trajectory([0.0, 0.05], [0, 1], [0, 0]))


def test_resample_examples():
    tr = Trajectory([0.0, 1.0], [0.0, 1.0], [0.0, 0.0])
    mid = resample(tr, [0.5])
    assert (mid.x[0], mid.y[0]) == (0.5, 0.0)
    assert resample(tr, tr.t).equals(tr)
    rng = np.random.default_rng(0)
    irregular = random_trajectory(rng)
    grid = np.linspace(0.0, 10.0, 41)
    once = resample(irregular, grid)
    assert resample(once, grid).equals(once)
    with pytest.raises(InputError):
        resample(tr, [-0.5, 0.5])


def test_drag_identity_when_degenerate():
    probe = plan_spiral(0.15, 1.0, 0.38, dt=0.05).trajectory
    image = apply_drag_surrogate(probe, DragSurrogateParams(stick_radius=0.0, lag_time=1e-12))
    np.testing.assert_allclose(image.points, probe.points, atol=1e-12)


def test_drag_stationary_probe():
    t = np.linspace(0.0, 2.0, 21)
    probe = Trajectory(t, np.full(21, 0.3), np.full(21, -0.2))
    image = apply_drag_surrogate(probe)
    np.testing.assert_array_equal(image.points, probe.points)


def test_drag_deterministic():
    probe = plan_raster(0.15, 1.0, 1.0, 0.38, dt=0.01).trajectory
    assert apply_drag_surrogate(probe).equals(apply_drag_surrogate(probe))


def image_steps_reference(probe, p):
    """Step-by-step reference of the stick/slip rules with scalar arithmetic."""
    from math import cos, exp, radians

    P = list(zip(probe.x.tolist(), probe.y.tolist()))
    I = [P[0]]
    stuck, off, v = True, (0.0, 0.0), (0.0, 0.0)
    for k in range(1, len(P)):
        gx, gy = P[k][0] - I[-1][0], P[k][1] - I[-1][1]
        dist = hypot(gx, gy)
        sx, sy = P[k][0] - P[k - 1][0], P[k][1] - P[k - 1][1]
        if stuck:
            if dist > p.stick_radius:
                stuck = False
                off = (gx * p.stick_radius / dist, gy * p.stick_radius / dist)
        else:
            nv, ns = hypot(*v), hypot(sx, sy)
            if dist <= p.stick_radius and nv * ns > 0 and v[0] * sx + v[1] * sy < cos(radians(45)) * nv * ns:
                stuck = True
        if stuck:
            I.append(I[-1])
        else:
            beta = p.creep_gain * (1 - exp(-(probe.t[k] - probe.t[k - 1]) / p.lag_time))
            nxt = (
                I[-1][0] + beta * (P[k][0] - off[0] - I[-1][0]),
                I[-1][1] + beta * (P[k][1] - off[1] - I[-1][1]),
            )
            v = (nxt[0] - I[-1][0], nxt[1] - I[-1][1])
            I.append(nxt)
    return np.array(I)


def test_drag_matches_step_reference():
    probe = plan_raster(0.15, 1.0, 1.0, 0.38, dt=0.01).trajectory
    p = DragSurrogateParams(stick_radius=0.05, lag_time=0.05, creep_gain=0.8)
    np.testing.assert_allclose(apply_drag_surrogate(probe, p).points, image_steps_reference(probe, p), atol=1e-12)


def test_drag_dwells_at_raster_corners():
    width = 1.0
    plan = plan_raster(0.15, width, width, 0.38, dt=0.01)
    probe = plan.trajectory
    image = apply_drag_surrogate(probe, DragSurrogateParams(stick_radius=0.05))
    step = np.hypot(np.diff(image.x), np.diff(image.y))
    stroke = width / 0.38
    # Every corner after the first stroke is followed by image samples with no motion.
    corner_times = stroke * np.arange(1, 4) + 0.15 / 0.38 * np.arange(0, 3)
    for tc in corner_times:
        window = (probe.t[1:] > tc) & (probe.t[1:] < tc + 0.5)
        assert np.any(step[window] == 0.0)
    # Along straight stretches the image keeps moving.
    middle = (probe.t[1:] > 0.5) & (probe.t[1:] < stroke - 0.2)
    assert np.all(step[middle] > 0)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    delta=st.floats(0.0, 0.2),
    lag=st.floats(1e-3, 1.0),
    gain=st.floats(0.0, 1.0),
)
def test_drag_passivity(seed, delta, lag, gain):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 80))
    t = np.cumsum(rng.uniform(0.001, 0.1, n))
    xy = np.cumsum(rng.normal(0.0, rng.uniform(0.001, 0.2), (n, 2)), axis=0)
    probe = Trajectory(t, xy[:, 0], xy[:, 1])
    image = apply_drag_surrogate(probe, DragSurrogateParams(delta, lag, gain))
    assert image.path_length() <= probe.path_length() + 1e-12


def test_drag_params_validation():
    with pytest.raises(InputError):
        DragSurrogateParams(stick_radius=-1.0)
    with pytest.raises(InputError):
        DragSurrogateParams(lag_time=0.0)
    with pytest.raises(InputError):
        DragSurrogateParams(creep_gain=1.5)


@pytest.mark.parametrize("delta", [0.02, 0.035, 0.05, 0.075, 0.1])
def test_spiral_smoother_than_raster(delta):
    side = sqrt(pi)
    spiral = plan_spiral(0.15, 1.0, 0.38, dt=0.01).trajectory
    raster = plan_raster(0.15, side, side, 0.38, dt=0.01).trajectory
    p = DragSurrogateParams(stick_radius=delta)
    c_spiral = mismatch_C(apply_drag_surrogate(spiral, p), spiral)
    c_raster = mismatch_C(apply_drag_surrogate(raster, p), raster)
    assert c_spiral < c_raster


def test_ideal_dots_spacing():
    dots = ideal_spiral_dots(0.15, 1.0, 0.05)
    gaps = np.hypot(*np.diff(dots, axis=0).T)
    assert np.all(gaps <= 0.05 + 1e-12)
    assert np.hypot(*dots[-1]) <= 1.0 + 1e-12


def test_distance_to_polyline():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    pts = np.array([[0.5, 0.5], [2.0, 0.5], [-1.0, 0.0], [1.0, 0.0]])
    np.testing.assert_allclose(distance_to_polyline(pts, verts), [0.5, 1.0, 1.0, 0.0])


def test_match_ratio_self():
    traj = plan_spiral(0.15, 1.0, 0.38, dt=0.01).trajectory
    rep = match_ratio(traj, 0.15, 1.0)
    assert rep.ratio == 1.0
    assert rep.matched + rep.mismatched + rep.irrelevant == len(ideal_spiral_dots(0.15, 1.0, 0.05))


def test_match_ratio_radial_offset():
    base = plan_spiral(0.15, 1.0, 0.38, dt=0.01).trajectory
    r = base.radius
    scale = np.where(r > 0, (r + 0.02) / np.where(r > 0, r, 1.0), 1.0)
    traj = Trajectory(base.t, base.x * scale, base.y * scale)
    # Move the centre sample too so every part of the path is offset.
    pts = traj.points
    pts[0] = (0.02, 0.0)
    traj = Trajectory(traj.t, pts[:, 0], pts[:, 1])
    assert match_ratio(traj, 0.15, 1.0, half_thickness=0.015).ratio == 0.0


def test_match_ratio_irrelevant_dots():
    half = plan_spiral(0.15, 0.5, 0.38, dt=0.01).trajectory
    rep = match_ratio(half, 0.15, 1.0)
    assert rep.irrelevant > 0
    assert rep.ratio == 1.0


def test_match_ratio_errors():
    point = Trajectory([0.0, 1.0], [0.1, 0.1], [0.0, 0.0])
    with pytest.raises(InputError):
        match_ratio(point, 0.15, 1.0)
    traj = plan_spiral(0.15, 1.0, 0.38, dt=0.1).trajectory
    with pytest.raises(InputError):
        match_ratio(traj, 0.15, 1.0, half_thickness=0.0)


def test_simulated_scan_matches_commanded(params, profile):
    prog = constant_speed_cam_program(profile, params)
    traj = simulate_scan(prog, profile, params, dt=0.01)
    assert match_ratio(traj, params.alpha, params.Z).ratio >= 0.9


def test_match_ratio_monotone_in_noise():
    base = plan_spiral(0.15, 1.0, 0.38, dt=0.05).trajectory
    amplitudes = [0.0, 0.005, 0.01, 0.02, 0.04]
    means = []
    for amp in amplitudes:
        ratios = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            noise = rng.normal(0.0, amp, (len(base), 2)) if amp else np.zeros((len(base), 2))
            noisy = Trajectory(base.t, base.x + noise[:, 0], base.y + noise[:, 1])
            ratios.append(match_ratio(noisy, 0.15, 1.0).ratio)
        means.append(np.mean(ratios))
    assert all(b <= a for a, b in zip(means, means[1:]))
    assert means[0] == 1.0 and means[-1] < means[0]
