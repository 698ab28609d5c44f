from __future__ import annotations

import math

import numpy as np
import pytest

from mintime.core.rng import SplitMix64
from mintime.extremal import shoot_extremal
from mintime.geometry import (
    AttainableOptions,
    CheckSummary,
    HypographOptions,
    SphereCertificateRecord,
    R_of_T,
    ball_inside,
    boundary_points,
    certify_attainable_inner_ball,
    certify_hypograph_exterior_sphere,
    check_inner_ball,
    check_realized_by_ball,
    check_sublevel_normal,
    hypograph_points,
    proximal,
    rho_T_of,
    verification_slack,
)
from mintime.model.errors import EmptyBoundaryError
from mintime.model.inclusion import Constants
from mintime.scenarios import ball_origin_scenario, eikonal_scenario, example1_T, get_scenario
from mintime.solver import (
    Grid,
    ScalarField,
    SolverOptions,
    attainable_set,
    restrict_continuity_region,
)


def test_inner_ball_factor_matches_closed_form():
    constants = Constants(K=1.0, K1=1.0, c0=1.0)

    expected = (math.exp(-0.3) - 0.02) / 1.2**2
    assert R_of_T(constants, 1.0, 0.1) == pytest.approx(expected)
    assert R_of_T(constants, 1.0, 0.1) == pytest.approx(0.500568, abs=1e-6)
    assert R_of_T(Constants(), 2.0, 0.7) == pytest.approx(2.0)


def test_inner_ball_factor_undefined_when_gate_fails():
    assert R_of_T(Constants(c0=1.0), 1.0, 1.0) is None


def _random_parameters(count: int, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    highs = (3.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0)
    rows = [[rng.uniform(0.0, high) for high in highs] for _ in range(count)]
    return np.asarray(rows)


def test_exterior_radius_matches_recoded_formula():
    params = _random_parameters(10_000, 7)
    norm_x, r, K, K1, K2, c0, rho0 = params.T
    rho0 = rho0 + 0.05

    rho = rho0 * np.exp(-(K + 2.0 * K1) * r) / (1.0 + 2.0 * c0 * rho0 * r)
    near, far = norm_x + 1.0, norm_x + 2.0
    L1 = (
        np.exp(K * r) * (1.0 + (K2 * near * np.exp(K2 * r)) ** 2) / (2.0 * rho)
        + K * K2 * near * np.exp((K + K2) * r)
        + 2.0 * K * np.exp(K * r)
    )
    L2 = K * K2 * near * np.exp(K2 * r) * (1.0 + 2.0 * np.exp(K * r))
    L4 = (
        (1.0 + (K2 * far) ** 2 * np.exp(2.0 * K2)) / (2.0 * rho)
        + K1 * (1.0 + K2 * far * np.exp(K2))
        + 1.0
    )
    expected = 1.0 / np.maximum(2.0 * L1 + L2, 2.0 * L4)

    computed = np.array(
        [
            rho_T_of(np.array([n, 0.0]), t, Constants(K=k, K1=k1, K2=k2, c0=c), r0)
            for n, t, k, k1, k2, c, r0 in zip(norm_x, r, K, K1, K2, c0, rho0)
        ]
    )
    np.testing.assert_allclose(computed, expected, rtol=1e-12, atol=0.0)


def test_inner_ball_factor_matches_recoded_formula():
    params = _random_parameters(10_000, 11)
    R, T, K, K1 = params[:, 1] + 0.05, params[:, 2] + 0.05, params[:, 3], params[:, 4]
    c0 = params[:, 5] * 0.1

    gate = np.exp(-3.0 * K * T) - 2.0 * c0 * R * T**2
    expected = R * gate / (1.0 + (K + K1) * T) ** 2

    for k in range(len(params)):
        value = R_of_T(Constants(K=K[k], K1=K1[k], c0=c0[k]), R[k], T[k])
        if gate[k] <= 0.0:
            assert value is None
        else:
            assert value == pytest.approx(expected[k], rel=1e-12, abs=0.0)


def test_exterior_radius_for_constant_dynamics():
    # K = K1 = K2 = 0 leaves L1 = 1 / (2 rho0) and L4 = 1 / (2 rho0) + 1.
    for rho0 in (0.25, 1.0, 4.0):
        radius = rho_T_of(np.array([0.3, 0.4]), 0.5, Constants(), rho0)
        assert radius == pytest.approx(rho0 / (1.0 + 2.0 * rho0))


def test_exterior_radius_shrinks_along_the_arc():
    constants = Constants(K=0.5, K1=0.2, K2=1.0, c0=0.1)
    x = np.array([0.5, -0.5])

    radii = [rho_T_of(x, r, constants, 1.0) for r in (0.0, 0.5, 1.0, 2.0)]

    assert all(a > b > 0.0 for a, b in zip(radii, radii[1:]))


def test_verification_slack_clamps_slope():
    assert verification_slack(0.01, 2.0) == pytest.approx(0.06)
    assert verification_slack(0.01, 1e6) == pytest.approx(2.0 * 0.01 * 101.0)


def test_realized_by_ball_depends_on_radius():
    points = np.array([[0.5, 0.1], [-1.0, -0.5], [0.0, 0.0]])
    base = np.zeros(2)
    normal = np.array([0.0, 2.0])

    small = check_realized_by_ball(points, base, normal, 1.0)
    large = check_realized_by_ball(points, base, normal, 10.0)

    assert small.passed
    assert small.tested_count == 3
    np.testing.assert_allclose(small.normal, [0.0, 1.0])
    assert not large.passed
    np.testing.assert_allclose(large.worst_point, [0.5, 0.1])
    assert large.sigma_residual == pytest.approx(0.1 - 0.26 / 20.0)


def test_ball_inside_respects_mask_and_box():
    grid = Grid.from_spacing([-1.0, -1.0], [1.0, 1.0], 0.1)
    inside = np.ones(grid.shape, dtype=bool)
    inside[grid.nearest_index(np.zeros(2))] = False

    assert ball_inside(grid, inside, np.array([0.5, 0.5]), 0.3)
    assert not ball_inside(grid, inside, np.array([0.05, 0.0]), 0.3)
    assert not ball_inside(grid, inside, np.array([0.9, 0.0]), 0.3)


def test_inner_ball_of_a_disk():
    grid = Grid.from_spacing([-1.0, -1.0], [1.0, 1.0], 0.02)

    def disk(x):
        return np.linalg.norm(x, axis=-1) - 0.5

    fits = check_inner_ball(disk, grid, 0.25, slack=0.1)
    too_big = check_inner_ball(disk, grid, 0.6, slack=0.1)

    assert fits.pass_fraction == 1.0
    assert fits.worst_boundary_point is None
    assert too_big.certified == 0
    assert too_big.worst_boundary_point is not None


def test_inner_ball_of_a_square():
    grid = Grid.from_spacing([-1.0, -1.0], [1.0, 1.0], 0.02)

    def square(x):
        return np.max(np.abs(x), axis=-1) - 0.51

    small = check_inner_ball(square, grid, 0.1, slack=0.1)
    too_big = check_inner_ball(square, grid, 0.6, slack=0.1)

    assert small.total == 200
    assert small.pass_fraction >= 0.8
    assert too_big.certified == 0


def test_inner_ball_of_a_thin_rectangle():
    grid = Grid.from_spacing([-1.0, -1.0], [1.0, 1.0], 0.02)

    def strip(x):
        return np.maximum(np.abs(x[..., 0]) - 0.51, np.abs(x[..., 1]) - 0.05)

    thin = check_inner_ball(strip, grid, 0.03, slack=0.1)
    wide = check_inner_ball(strip, grid, 0.2, slack=0.1)

    assert thin.pass_fraction >= 0.9
    assert wide.certified == 0
    assert wide.worst_boundary_point is not None


def test_boundary_points_need_a_boundary():
    grid = Grid.from_spacing([0.0], [1.0], 0.1)

    with pytest.raises(EmptyBoundaryError):
        boundary_points(grid, np.ones(grid.shape, dtype=bool))


def test_semiconcavity_of_concave_cone_away_from_apex():
    rng = np.random.default_rng(0)
    angles = rng.uniform(0.0, 2.0 * np.pi, 200)
    radii = rng.uniform(0.3, 0.9, 200)
    xs = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
    steps = [np.array([0.1, 0.0]), np.array([0.0, 0.05]), np.array([0.07, -0.07])]

    report = proximal.test_semiconcavity(
        lambda x: 1.0 - np.linalg.norm(x, axis=-1), xs, 0.0, steps
    )

    assert report.passed
    assert report.count == 600


def test_semiconcavity_fails_at_convex_apex():
    report = proximal.test_semiconcavity(
        lambda x: np.linalg.norm(x, axis=-1), np.zeros((1, 2)), 0.0, [np.array([0.1, 0.0])]
    )

    assert not report.passed
    assert report.max_excess == pytest.approx(0.2)


def test_semiconcavity_on_quadratic_fields():
    grid = Grid.from_spacing([-1.0, -1.0], [1.0, 1.0], 0.1)
    sq = np.sum(grid.points() ** 2, axis=1)
    mask = np.ones(grid.shape, dtype=bool)
    steps = [np.array([1, 0]), np.array([0, 1]), np.array([1, 1])]

    concave = proximal.test_semiconcavity(ScalarField(grid=grid, values=-sq), mask, 0.0, steps)
    convex = ScalarField(grid=grid, values=sq)

    assert concave.passed
    assert not proximal.test_semiconcavity(convex, mask, 0.5, steps).passed
    assert proximal.test_semiconcavity(convex, mask, 1.0, steps).passed


def test_lipschitz_sampling_flags_the_non_lipschitz_seam():
    line = np.column_stack([np.zeros(201), np.linspace(-0.1, 0.1, 201)])

    def closed_form(points):
        return np.array([example1_T(float(a), float(b)) for a, b in points])

    report = proximal.test_lipschitz_sampling(closed_form, line, L=20.0)

    assert not report.passed
    assert report.max_ratio > 40.0
    assert report.count == 201 * 200 // 2


def test_lipschitz_sampling_on_eikonal(eikonal_field):
    oracle = eikonal_scenario().oracle_at
    rng = np.random.default_rng(1)
    points = rng.uniform(-1.0, 1.0, size=(300, 2))

    exact = proximal.test_lipschitz_sampling(
        lambda pts: np.array([oracle(p) for p in pts]), points, L=1.0 + 1e-9
    )
    mask = restrict_continuity_region(eikonal_field)
    numeric = proximal.test_lipschitz_sampling(eikonal_field, mask, L=1.5)

    assert exact.passed
    assert numeric.passed
    assert numeric.count > 0


def test_hypograph_points_stack_the_ladder(eikonal_field):
    mask = restrict_continuity_region(eikonal_field)

    points = hypograph_points(eikonal_field, mask, rungs=2, step=0.1)

    kept = int(mask.sum())
    assert points.shape == (3 * kept, 3)
    np.testing.assert_allclose(points[kept:2 * kept, 2], points[:kept, 2] - 0.1)


def test_hypograph_certificates_on_eikonal(eikonal_field):
    scenario = eikonal_scenario()
    mask = restrict_continuity_region(eikonal_field)

    certificates = certify_hypograph_exterior_sphere(
        eikonal_field,
        mask,
        scenario.model,
        scenario.target,
        scenario.model.constants,
        rho0=1.0,
        options=HypographOptions(samples=40, velocity_samples=64),
    )

    assert len(certificates) == 40
    assert sum(c.passed for c in certificates) >= 0.95 * len(certificates)


def test_sublevel_normal_along_eikonal_arc(eikonal_field):
    scenario = eikonal_scenario()
    arc = shoot_extremal(scenario.model, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), 0.5)
    mask = np.ones(eikonal_field.grid.shape, dtype=bool)

    certificate = check_sublevel_normal(
        eikonal_field, mask, arc, 0.2, scenario.model.constants, 1.0, slack=0.08
    )

    np.testing.assert_allclose(certificate.base, [0.7, 0.0], atol=1e-9)
    np.testing.assert_allclose(certificate.normal, [1.0, 0.0], atol=1e-9)
    assert certificate.passed


@pytest.fixture(scope="module")
def example1_exact_field():
    scenario = get_scenario("example1")
    grid = Grid.from_spacing(scenario.lower, scenario.upper, 0.02)
    values = np.array([example1_T(float(a), float(b)) for a, b in grid.points()])
    return ScalarField(grid=grid, values=values)


@pytest.mark.parametrize("seam_only", [False, True])
def test_hypograph_certificates_on_example1_closed_form(example1_exact_field, seam_only):
    scenario = get_scenario("example1")
    points = example1_exact_field.grid.points()
    mask = example1_exact_field.flat > 0.0
    if seam_only:
        mask &= (points[:, 1] > 0.0) & (points[:, 1] <= 0.1)

    certificates = certify_hypograph_exterior_sphere(
        example1_exact_field,
        mask.reshape(example1_exact_field.grid.shape),
        scenario.model,
        scenario.target,
        scenario.model.constants,
        rho0=scenario.rho0,
        options=HypographOptions(samples=40),
    )

    assert len(certificates) == 40
    assert sum(c.passed for c in certificates) >= 0.95 * len(certificates)


@pytest.fixture(scope="module")
def disk_field():
    scenario = ball_origin_scenario()
    grid = Grid.from_spacing(scenario.lower, scenario.upper, 0.02)
    return attainable_set(scenario.model, np.zeros(2), 0.5, grid, SolverOptions(velocity_samples=64))


def test_attainable_inner_balls_on_disk(disk_field):
    model = ball_origin_scenario().model
    options = AttainableOptions(samples=40, constructive_points=3, theta_samples=10)

    report = certify_attainable_inner_ball(model, disk_field, 0.5, model.constants, 1.0, options)

    assert report.r0 == pytest.approx(1.0)
    assert report.passed_count == len(report.certificates) == 40
    assert len(report.constructive) == 30
    assert report.constructive_passed == 30


def test_attainable_inner_balls_fail_when_oversized(disk_field):
    model = ball_origin_scenario().model
    options = AttainableOptions(
        samples=40, constructive_points=0, slack_cells=1.0, radius_scale=1.1
    )

    report = certify_attainable_inner_ball(model, disk_field, 0.5, model.constants, 1.0, options)

    assert report.passed_count == 0


def test_sphere_certificate_record_layout():
    certificate = check_realized_by_ball(np.array([[0.0, -1.0]]), np.zeros(2), [0.0, 1.0], 1.0)

    record = SphereCertificateRecord.from_certificate(certificate).to_record()

    assert list(record) == [
        "base",
        "normal",
        "radius",
        "sigma_residual",
        "slack",
        "pass",
        "tested_count",
    ]
    assert record["pass"] is True


def test_check_summary_threshold_and_failure():
    summary = CheckSummary.tally("petrov", [True, False, True], 0.5, mu_min=0.2)

    assert summary.ok
    assert summary.summary_line() == "PASS 2/3"
    assert summary.details == {"mu_min": 0.2}
    assert not CheckSummary.tally("petrov", [True], 0.5, failure="petrov").ok
    assert not CheckSummary.tally("hypo", [], 0.5).ok
