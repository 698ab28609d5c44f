from __future__ import annotations

import math

import numpy as np
import pytest

from mintime.core.errors import InputError
from mintime.core.rng import SplitMix64
from mintime.extremal import (
    IntegrationDiagnosticError,
    arc_to_csv,
    check_flow_lipschitz,
    flow_to_csv,
    integrate_frozen_flow,
    rho_of_s,
    shoot_extremal,
    shoot_from_terminal,
    transport_adjoint,
    verify_adjoint_bounds,
    verify_growth_bounds,
)
from mintime.model.errors import DegenerateCovectorError
from mintime.model.inclusion import Constants, ball_model, box_model
from mintime.scenarios import example1_gamma, example1_model, example1_target


def test_eikonal_shot_runs_straight_inward(unit_ball):
    x1, nu = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
    arc = shoot_extremal(unit_ball, x1, nu, 0.5, rho0=1.0)

    np.testing.assert_allclose(arc.terminal_state, [0.5, 0.0], atol=1e-9)
    np.testing.assert_allclose(arc.terminal_adjoint, [-1.0, 0.0], atol=1e-12)
    assert arc.lam == pytest.approx(1.0)
    assert arc.horizon == pytest.approx(0.5)
    assert arc.rho is not None and arc.rho[0] == pytest.approx(1.0)


def test_example1_shot_along_lower_ray():
    model = example1_model()

    arc = shoot_extremal(model, np.array([1.0, -0.5]), np.array([-1.0, 0.0]), 0.5)

    np.testing.assert_allclose(arc.terminal_state, [0.5, -0.5], atol=1e-9)
    assert arc.lam == pytest.approx(1.0)


def test_shot_starts_the_adjoint_at_the_unit_normal(unit_ball):
    x1 = np.array([1.0, 0.0])

    outward = shoot_extremal(unit_ball, x1, np.array([-3.0, 0.0]), 0.5)
    flipped = shoot_extremal(unit_ball, x1, np.array([3.0, 0.0]), 0.5)

    np.testing.assert_allclose(outward.adjoints[0], [-1.0, 0.0])
    np.testing.assert_allclose(outward.terminal_state, [0.5, 0.0], atol=1e-9)
    np.testing.assert_allclose(flipped.terminal_state, [1.5, 0.0], atol=1e-9)


def test_zero_length_shot_is_a_single_sample(unit_ball):
    nu = np.array([0.0, -1.0])
    arc = shoot_extremal(unit_ball, np.array([0.0, 1.0]), nu, 0.0)

    assert len(arc.times) == 1
    np.testing.assert_array_equal(arc.states[0], [0.0, 1.0])
    np.testing.assert_array_equal(arc.adjoints[0], nu)
    assert arc.lam == pytest.approx(unit_ball.hamiltonian(arc.states[0], -nu))


def test_vanishing_normal_is_rejected(unit_ball):
    with pytest.raises(DegenerateCovectorError) as exc_info:
        shoot_extremal(unit_ball, np.array([1.0, 0.0]), np.zeros(2), 0.5)
    assert exc_info.value.exit_code == 2


def test_understated_K_trips_the_gronwall_check():
    model = ball_model(
        2,
        center=lambda x: np.array([x[0], 0.0]),
        constants=Constants.provided(K=0.0, K1=0.0, K2=1.0, c0=0.0),
    )

    with pytest.raises(IntegrationDiagnosticError) as exc_info:
        shoot_extremal(model, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.5)
    assert exc_info.value.exit_code == 4


def test_seeded_shots_respect_adjoint_bounds_and_hamiltonian_sign(unit_ball):
    rng = SplitMix64(0)
    example = example1_model()
    target = example1_target()

    for _ in range(20):
        angle = rng.uniform(0.0, 2.0 * math.pi)
        x1 = np.array([math.cos(angle), math.sin(angle)])
        arc = shoot_extremal(unit_ball, x1, -x1, rng.uniform(0.05, 0.9), dt=1e-3)
        assert verify_adjoint_bounds(arc, K=0.0).holds
        assert arc.lam >= -1e-8

        point = example1_gamma(rng.uniform(-0.5, 1.5))
        nu = target.normal_at(point)
        arc = shoot_extremal(example, point, nu, rng.uniform(0.05, 0.5), dt=1e-3)
        report = verify_adjoint_bounds(arc, K=1.0)
        assert report.holds
        assert report.sandwich_violation <= 1e-6
        assert arc.lam >= -1e-8


def test_terminal_shot_retraces_forward_shot(unit_ball):
    forward = shoot_extremal(unit_ball, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.5)

    backward = shoot_from_terminal(
        unit_ball, forward.terminal_state, forward.terminal_adjoint, 0.5
    )

    np.testing.assert_allclose(backward.states[0], [1.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(backward.times, forward.times)


def test_kinks_are_flagged_where_one_sided_derivatives_split():
    model = box_model(2, lambda x: np.array([[abs(x[0]), 0.0]]))

    arc = shoot_extremal(model, np.array([0.0, 0.0]), np.array([-1.0, 0.0]), 0.01)

    assert 0 in arc.kinks


def test_transport_keeps_z_constant_for_constant_adjoint(unit_ball):
    arc = shoot_extremal(unit_ball, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.5)
    theta = np.array([0.2, -0.3])

    transport = transport_adjoint(arc, theta, r0=0.5)

    expected = np.tile([-1.2, 0.3], (len(arc.times), 1))
    np.testing.assert_allclose(transport.z_values, expected, atol=1e-12)
    np.testing.assert_allclose(transport.z_at(0.25), [-1.2, 0.3], atol=1e-12)


def test_transport_rejects_theta_outside_unit_ball(unit_ball):
    arc = shoot_extremal(unit_ball, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.1)

    with pytest.raises(InputError):
        transport_adjoint(arc, np.array([1.0, 0.0]))


def test_frozen_flow_and_growth_bounds(unit_ball):
    flow = integrate_frozen_flow(unit_ball, np.array([1.0, 0.0]), np.zeros(2), 1.0)

    np.testing.assert_allclose(flow.endpoint, [1.0, 0.0], atol=1e-9)
    assert verify_growth_bounds(unit_ball, flow, K2=1.0).holds


def test_frozen_flow_stops_when_leaving_box(unit_ball):
    box = (np.array([-0.5, -0.5]), np.array([0.5, 0.5]))

    flow = integrate_frozen_flow(unit_ball, np.array([0.0, 1.0]), np.zeros(2), 1.0, box=box)

    assert flow.escaped
    assert flow.times[-1] < 1.0


def test_growth_bound_fails_for_understated_K2():
    fast = ball_model(2, radius=3.0)
    flow = integrate_frozen_flow(fast, np.array([1.0, 0.0]), np.zeros(2), 1.0)

    assert not verify_growth_bounds(fast, flow, K2=1.0).holds


def test_flow_lipschitz_bound(unit_ball):
    p = np.array([1.0, 1.0])
    a = integrate_frozen_flow(unit_ball, p, np.zeros(2), 1.0)
    b = integrate_frozen_flow(unit_ball, p, np.array([0.1, 0.0]), 1.0)
    assert check_flow_lipschitz(a, b, K1=0.0).holds

    expanding = ball_model(2, center=lambda x: 2.0 * x)
    a = integrate_frozen_flow(expanding, p, np.zeros(2), 1.0)
    b = integrate_frozen_flow(expanding, p, np.array([0.1, 0.0]), 1.0)
    assert not check_flow_lipschitz(a, b, K1=0.0).holds
    assert check_flow_lipschitz(a, b, K1=2.0).holds


def test_rho_of_s_matches_closed_form():
    rng = SplitMix64(4)
    for _ in range(1000):
        K, K1, c0 = rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3)
        rho0, s = rng.uniform(0.01, 5), rng.uniform(0, 4)
        expected = rho0 / (1 + 2 * c0 * rho0 * s) * math.exp(-(K + 2 * K1) * s)
        got = rho_of_s(Constants(K=K, K1=K1, c0=c0), rho0, s)
        assert got == pytest.approx(expected, rel=1e-12)


def test_arc_and_flow_csv_headers(tmp_path, unit_ball):
    arc = shoot_extremal(unit_ball, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.002)
    lines = arc_to_csv(arc, tmp_path / "arc.csv").read_text().splitlines()

    assert lines[0] == "s,x1,x2,p1,p2"
    assert lines[1] == "0,1,0,-1,0"
    assert len(lines) == len(arc.times) + 1

    flow = integrate_frozen_flow(unit_ball, np.array([1.0, 0.0]), np.zeros(2), 0.002)
    assert flow_to_csv(flow, tmp_path / "flow.csv").read_text().startswith("s,x1,x2,p1,p2\n")


def _rotation(t: float) -> np.ndarray:
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


@pytest.fixture()
def swirl():
    """F(x) = A x + closed unit ball, A generating rotations."""

    turn = np.array([[0.0, -1.0], [1.0, 0.0]])
    return ball_model(2, center=lambda x: turn @ np.asarray(x, dtype=float), name="swirl")


def test_frozen_flow_converges_at_fourth_order(swirl):
    x0, rest = np.array([0.5, -0.2]), np.array([0.0, 1.0])
    exact = rest + _rotation(1.0) @ (x0 - rest)

    errors = []
    for dt in (0.1, 0.05):
        flow = integrate_frozen_flow(swirl, [1.0, 0.0], x0, 1.0, dt=dt)
        errors.append(float(np.linalg.norm(flow.endpoint - exact)))

    assert errors[1] < 1e-6
    assert errors[0] / errors[1] >= 12.0


def test_extremal_shot_converges_at_fourth_order(swirl):
    x1, nu = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    # p(s) = R(-s) nu and x(s) = R(-s) (x1 + s nu).
    exact_x = _rotation(-1.0) @ (x1 + nu)
    exact_p = _rotation(-1.0) @ nu

    errors = []
    for dt in (0.1, 0.05):
        arc = shoot_extremal(swirl, x1, nu, 1.0, dt=dt)
        errors.append(
            float(np.linalg.norm(arc.terminal_state - exact_x))
            + float(np.linalg.norm(arc.terminal_adjoint - exact_p))
        )

    assert errors[1] < 1e-6
    assert errors[0] / errors[1] >= 12.0
