import math
from math import pi

import numpy as np
import pytest

from otsuki import geometry
from otsuki.geometry import (
    DomainError,
    OrbitMetric,
    OutOfRange,
    RotationNumber,
    arc_length_quarter,
    clairaut_momentum,
    embed,
    embedding_grid,
    induced_metric_at,
    omega,
    period,
    solve_turning_value,
    trace_geodesic,
)
from otsuki.numerics import find_root_monotone, integrate_ode

from conftest import REFERENCE


class TestRotationNumber:
    @pytest.mark.parametrize("p,q", [(2, 3), (3, 5), (4, 7), (5, 8), (5, 9), (7, 10)])
    def test_valid(self, p, q):
        r = RotationNumber(p, q)
        assert 0.5 < r.value < math.sqrt(2.0) / 2.0
        assert abs(r.closure_angle - pi * p / q) == 0.0

    @pytest.mark.parametrize("p,q", [
        (4, 6),    # not in lowest terms
        (1, 2),    # exactly 1/2
        (3, 4),    # above sqrt(2)/2
        (5, 7),    # above sqrt(2)/2
        (1, 1),
        (0, 1),
        (-2, 3),
        (2, -3),
    ])
    def test_invalid(self, p, q):
        with pytest.raises(ValueError):
            RotationNumber(p, q)

    def test_non_integer_rejected(self):
        with pytest.raises(ValueError):
            RotationNumber(2.0, 3)

    def test_unreduced_fraction_never_aliases(self):
        # 4/6 must not silently behave as 2/3
        with pytest.raises(ValueError):
            RotationNumber(4, 6)


class TestOrbitMetric:
    def test_product_identity(self):
        phi = np.linspace(0.05, pi / 2 - 0.05, 101)
        np.testing.assert_allclose(OrbitMetric.G(phi),
                                   OrbitMetric.E(phi) * np.cos(phi) ** 2,
                                   rtol=1e-14)

    def test_g_monotone_on_half_intervals(self):
        rising = OrbitMetric.G(np.linspace(0.01, pi / 4, 64))
        falling = OrbitMetric.G(np.linspace(pi / 4, pi / 2 - 0.01, 64))
        assert np.all(np.diff(rising) > 0)
        assert np.all(np.diff(falling) < 0)

    def test_g_reflection_symmetric(self):
        phi = np.linspace(0.02, pi / 2 - 0.02, 57)
        np.testing.assert_allclose(OrbitMetric.G(phi), OrbitMetric.G(pi / 2 - phi),
                                   rtol=1e-12)

    def test_derivatives_match_finite_differences(self):
        phi = np.linspace(0.1, 1.4, 27)
        h = 1e-6
        np.testing.assert_allclose(OrbitMetric.E_prime(phi),
                                   (OrbitMetric.E(phi + h) - OrbitMetric.E(phi - h)) / (2 * h),
                                   rtol=1e-8)
        np.testing.assert_allclose(OrbitMetric.G_prime(phi),
                                   (OrbitMetric.G(phi + h) - OrbitMetric.G(phi - h)) / (2 * h),
                                   rtol=1e-7, atol=1e-4)


class TestOmega:
    def test_clifford_closed_form(self):
        assert abs(omega(pi / 4) - math.sqrt(2.0) * pi / 2.0) <= 1e-10

    def test_benchmark_turning_value_for_2_3(self):
        # a = 0.33787... pairs with a closure angle of 2 pi / 3
        assert abs(omega(0.33787) - 2.0 * pi / 3.0) <= 1e-4

    def test_small_a_limit(self):
        value = omega(1e-3)
        assert pi / 2.0 < value < pi / 2.0 + 0.05
        # shrinking a approaches the limiting advance pi/2 from above
        closer = omega(1e-4)
        assert pi / 2.0 < closer < value

    def test_strictly_increasing_on_grid(self):
        grid = np.linspace(0.01, pi / 4.0, 50)
        values = [omega(a) for a in grid]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_range(self):
        for a in np.linspace(0.01, pi / 4.0, 25):
            value = omega(a)
            assert pi / 2.0 < value <= math.sqrt(2.0) * pi / 2.0 + 1e-12

    @pytest.mark.parametrize("bad", [0.0, -0.2, pi / 4 + 1e-6, 1.0])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            omega(bad)


class TestSolveTurningValue:
    @pytest.mark.parametrize("p,q", list(REFERENCE))
    def test_reference_turning_values(self, p, q):
        a_ref = REFERENCE[(p, q)][0]
        a = solve_turning_value(RotationNumber(p, q))
        assert abs(a - a_ref) <= 5e-4

    @pytest.mark.parametrize("p,q", [(2, 3), (5, 8)])
    def test_round_trip(self, p, q):
        r = RotationNumber(p, q)
        a = solve_turning_value(r)
        assert abs(omega(a) - r.closure_angle) <= 1e-10

    def test_root_finder_example(self):
        root = find_root_monotone(lambda x: omega(x) - 2.0 * pi / 3.0, 0.01, pi / 4.0)
        assert abs(root - 0.33787) <= 2e-5

    def test_near_upper_window(self):
        a = solve_turning_value(RotationNumber(7, 10))
        assert 0.3379 < a < pi / 4.0


class TestArcLength:
    @pytest.mark.parametrize("bad", [0.0, pi / 4.0, 1.0])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            arc_length_quarter(bad)

    def test_against_ode_turning_time(self):
        # the quadrature arc length must match the time at which an
        # independently integrated geodesic reaches its first turning point
        a = 0.245
        L = arc_length_quarter(a)
        c = clairaut_momentum(a)

        def rhs(t, y):
            phi, phi_dot, theta, theta_dot = y
            E, G = OrbitMetric.E(phi), OrbitMetric.G(phi)
            phi_dd = (-OrbitMetric.E_prime(phi) / (2.0 * E) * phi_dot ** 2
                      + OrbitMetric.G_prime(phi) / (2.0 * E) * theta_dot ** 2)
            theta_dd = -OrbitMetric.G_prime(phi) / G * phi_dot * theta_dot
            return (phi_dot, phi_dd, theta_dot, theta_dd)

        trajectory = integrate_ode(rhs, [a, 0.0, 0.0, c / OrbitMetric.G(a)],
                                   (0.0, 1.3 * L))
        t_turn = find_root_monotone(lambda t: float(trajectory(t)[1]),
                                    0.5 * L, 1.3 * L)
        assert abs(t_turn - L) <= 1e-6

    @pytest.mark.parametrize("p,q,t0_ref,tol", [
        (2, 3, 39.955, 0.05),
        (3, 5, 63.85, 0.1),
        (4, 7, 88.6, 0.1),
        (5, 8, 103.35, 0.1),
    ])
    def test_period_reference_values(self, p, q, t0_ref, tol):
        a = solve_turning_value(RotationNumber(p, q))
        assert abs(period(a, q) - t0_ref) <= tol

    def test_period_requires_positive_q(self):
        with pytest.raises(DomainError):
            period(0.3, 0)


class TestTraceGeodesic:
    def test_clifford_fixture(self, clifford):
        profile = clifford.profile
        assert abs(profile.t0 - 2.0 * pi ** 2) <= 1e-8
        assert abs(clifford.lambda_value - 4.0 * pi ** 2) <= 1e-8
        assert np.max(np.abs(profile.phi - pi / 4.0)) <= 1e-9

    def test_clifford_rejects_rotation(self):
        with pytest.raises(DomainError):
            trace_geodesic(pi / 4.0, RotationNumber(2, 3))

    def test_rotation_required_away_from_clifford(self):
        with pytest.raises(DomainError):
            trace_geodesic(0.3, None)

    def test_sample_count_floor(self):
        with pytest.raises(DomainError):
            trace_geodesic(0.33787, RotationNumber(2, 3), n_samples=40)

    def test_first_integrals(self, torus_23):
        profile = torus_23.profile
        assert profile.speed_error < 1e-7
        assert profile.momentum_error < 1e-7

    def test_closure(self, torus_23):
        profile = torus_23.profile
        assert profile.closure_phi_error < 1e-6
        assert profile.closure_theta_error < 1e-6
        assert abs(profile.phi_dot[-1] - profile.phi_dot[0]) < 1e-6

    def test_phi_stays_in_annulus(self, torus_23):
        profile = torus_23.profile
        assert profile.phi.min() >= profile.a - 1e-9
        assert profile.phi.max() <= pi / 2.0 - profile.a + 1e-9

    def test_extrema_counts(self, torus_23):
        # q minima and q maxima of phi per period (cyclic count; the exact
        # zero of phi_dot at t = 0 drops out and is covered by the wrap)
        profile = torus_23.profile
        sign = np.sign(profile.phi_dot[:-1])
        sign = sign[sign != 0]
        previous = np.roll(sign, 1)
        minima = int(np.sum((previous < 0) & (sign > 0)))
        maxima = int(np.sum((previous > 0) & (sign < 0)))
        assert minima == 3
        assert maxima == 3

    def test_theta_projections_change_sign_2p_times(self, torus_23):
        profile = torus_23.profile
        p = torus_23.rotation.p
        for f in (np.cos, np.sin):
            signs = np.sign(f(profile.theta[:-1]))
            signs = signs[signs != 0]
            assert int(np.sum(signs != np.roll(signs, 1))) == 2 * p

    def test_arc_reflection_symmetry(self, torus_23):
        # phi over a min-to-max arc mirrors the following max-to-min arc
        profile = torus_23.profile
        L = profile.t0 / profile.arcs_per_period
        s = np.linspace(0.0, 0.95 * L, 181)
        np.testing.assert_allclose(profile.phi_at(L + s), profile.phi_at(L - s),
                                   atol=1e-8)

    def test_q_fold_symmetry(self, torus_23):
        # advancing one min-to-min segment repeats phi and shifts theta by 2 pi p / q
        profile = torus_23.profile
        p, q = 2, 3
        segment = profile.t0 / q
        s = np.linspace(0.0, segment, 211)
        np.testing.assert_allclose(profile.phi_at(s + segment), profile.phi_at(s),
                                   atol=1e-8)
        np.testing.assert_allclose(profile.theta_at(s + segment),
                                   profile.theta_at(s) + 2.0 * pi * p / q,
                                   atol=1e-8)

    def test_default_sampling_is_resolution_aware(self, tori):
        for (p, q), torus in tori.items():
            profile = torus.profile
            assert profile.n_samples >= max(4096, 512 * q)
            layer = geometry.turning_layer_scale(profile.a)
            assert profile.n_samples >= 8.0 * profile.t0 / layer - 1.0


class TestBuildTorus:
    @pytest.mark.parametrize("p,q", list(REFERENCE))
    def test_reference_functional_values(self, tori, p, q):
        lam_ref = REFERENCE[(p, q)][2]
        torus = tori[(p, q)]
        assert abs(torus.lambda_value - lam_ref) <= 1e-3 * lam_ref
        assert torus.eigenvalue_index == REFERENCE[(p, q)][1]
        assert torus.area == torus.profile.t0
        assert torus.lambda_value == 2.0 * torus.area

    @pytest.mark.parametrize("p,q", list(REFERENCE))
    def test_quadrature_and_ode_periods_agree(self, tori, p, q):
        torus = tori[(p, q)]
        t0_quad = period(torus.profile.a, q)
        assert abs(torus.profile.t0 - t0_quad) <= 1e-6 * t0_quad

    def test_index_is_odd_and_at_least_3(self, tori):
        for torus in tori.values():
            assert torus.eigenvalue_index % 2 == 1
            assert torus.eigenvalue_index >= 3


class TestWindowEdges:
    def test_build_near_upper_window(self):
        # 7/10 sits close to sqrt(2)/2; the turning value lands past 0.5
        torus = geometry.build_torus(RotationNumber(7, 10))
        profile = torus.profile
        assert 0.5 < profile.a < pi / 4.0
        assert profile.speed_error < 1e-7
        assert profile.momentum_error < 1e-7
        assert torus.eigenvalue_index == 13

    def test_inconsistent_turning_value_fails_closure(self):
        # a turning value that belongs to no 2/3 geodesic cannot close
        with pytest.raises(geometry.ClosureFailure):
            trace_geodesic(0.2, RotationNumber(2, 3))


class TestEmbedding:
    def test_initial_point(self, torus_23):
        a = torus_23.profile.a
        point = embed(torus_23, 0.0, 0.0)
        np.testing.assert_allclose(point.as_array(),
                                   [math.sin(a), 0.0, math.cos(a), 0.0], atol=1e-12)

    def test_quarter_orbit(self, torus_23):
        a = torus_23.profile.a
        point = embed(torus_23, pi / 2.0, 0.0)
        np.testing.assert_allclose(point.as_array(),
                                   [0.0, math.sin(a), math.cos(a), 0.0], atol=1e-12)

    def test_unit_norm_everywhere(self, torus_23):
        rng = np.random.default_rng(7)
        for alpha, frac in zip(rng.uniform(0, 2 * pi, 50), rng.uniform(0, 1, 50)):
            point = embed(torus_23, float(alpha), float(frac) * torus_23.t0 * 0.999)
            assert abs(np.sum(point.as_array() ** 2) - 1.0) <= 1e-9

    def test_out_of_range(self, torus_23):
        with pytest.raises(OutOfRange):
            embed(torus_23, 2.0 * pi, 0.0)
        with pytest.raises(OutOfRange):
            embed(torus_23, 0.0, torus_23.t0)
        with pytest.raises(OutOfRange):
            embed(torus_23, -0.1, 0.0)

    def test_grid_matches_pointwise(self, torus_23):
        alphas = np.array([0.0, 1.0, 4.0])
        ts = np.array([0.0, 0.3 * torus_23.t0, 0.8 * torus_23.t0])
        grid = embedding_grid(torus_23, alphas, ts)
        for i, alpha in enumerate(alphas):
            for j, t in enumerate(ts):
                np.testing.assert_allclose(
                    grid[i, j], embed(torus_23, float(alpha), float(t)).as_array(),
                    atol=1e-12)

    def test_projection_pole_never_hit(self, tori):
        for torus in tori.values():
            profile = torus.profile
            w_max = np.max(np.abs(np.cos(profile.phi) * np.sin(profile.theta)))
            assert w_max < 1.0 - 1e-6


class TestInducedMetric:
    def test_product_identity(self, torus_23):
        for t in np.linspace(0.0, torus_23.t0, 37):
            g_aa, g_tt = induced_metric_at(torus_23, float(t))
            assert abs(g_aa * g_tt - 1.0 / (4.0 * pi ** 2)) <= 1e-12

    def test_clifford_constant(self, clifford):
        g_aa, _ = induced_metric_at(clifford, 1.2345)
        assert abs(g_aa - 0.5) <= 1e-9

    def test_area_from_volume_form(self, torus_23):
        # integral of sqrt(g_aa g_tt) over the fundamental domain equals t0
        ts = (np.arange(400) + 0.5) * (torus_23.t0 / 400)
        density = [math.sqrt(np.prod(induced_metric_at(torus_23, float(t)))) for t in ts]
        integral = 2.0 * pi * float(np.mean(density)) * torus_23.t0
        assert abs(integral - torus_23.t0) <= 1e-9 * torus_23.t0
