"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines; a failed assertion in any test marks that criterion failed.
"""

import math
import time
from math import pi

import numpy as np

from otsuki import spectral
from otsuki.geometry import RotationNumber, omega, period, solve_turning_value

from conftest import REFERENCE


def report(number: int, text: str) -> None:
    print(f"ACCEPTANCE {number:2d} PASS: {text}")


def test_criterion_01_omega_closed_form_anchor():
    error = abs(omega(pi / 4.0) - math.sqrt(2.0) * pi / 2.0)
    assert error <= 1e-10
    report(1, f"omega(pi/4) = sqrt(2) pi / 2 within {error:.2e}")


def test_criterion_02_turning_values():
    started = time.perf_counter()
    worst = 0.0
    for (p, q), (a_ref, _, _) in REFERENCE.items():
        a = solve_turning_value(RotationNumber(p, q))
        worst = max(worst, abs(a - a_ref))
        assert abs(a - a_ref) <= 5e-4, f"a({p}/{q}) = {a} vs {a_ref}"
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    report(2, f"five turning values within 5e-4 (worst {worst:.2e}, {elapsed:.2f}s)")


def test_criterion_03_functional_values(tori):
    started = time.perf_counter()
    worst_rel = 0.0
    worst_agree = 0.0
    for (p, q), (_, _, lam_ref) in REFERENCE.items():
        torus = tori[(p, q)]
        t0_ode = torus.profile.t0
        t0_quad = period(torus.profile.a, q)
        agree = abs(t0_ode - t0_quad) / t0_quad
        worst_agree = max(worst_agree, agree)
        assert agree <= 1e-6
        for lam in (2.0 * t0_ode, 2.0 * t0_quad):
            rel = abs(lam - lam_ref) / lam_ref
            worst_rel = max(worst_rel, rel)
            assert rel <= 1e-3, f"Lambda({p}/{q}) = {lam} vs {lam_ref}"
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    report(3, f"five functional values within 0.1% by both lengths "
              f"(worst {worst_rel:.2e}, cross-agreement {worst_agree:.2e})")


def test_criterion_04_eigenvalue_count_verification(tori):
    started = time.perf_counter()
    for (p, q), torus in tori.items():
        result = spectral.count_below(torus, threshold=2.0, l_max=3, n_grid=2048)
        assert result.grids_used == [2048, 4096]
        assert len(set(result.counts_by_grid.values())) == 1, \
            f"count unstable for {p}/{q}: {result.counts_by_grid}"
        assert result.n2 == 2 * p - 1, \
            f"N(2) = {result.n2} != {2 * p - 1} for {p}/{q}"
        assert result.verdict
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    report(4, f"N(2) = 2p - 1 for all five tori, stable across 2048/4096 "
              f"({elapsed:.1f}s)")


def test_criterion_05_exact_eigenvalue_anchors(tori):
    orders = []
    for (p, q), torus in tori.items():
        residual_band = 10.0 * max(spectral.known_eigenfunction_residuals(torus, 2048))
        l0 = spectral.eigen_low(spectral.assemble(torus, 0, 2048), 2 * p + 2)
        l1 = spectral.eigen_low(spectral.assemble(torus, 1, 2048), 1)
        assert abs(l1.eigenvalues[0] - 2.0) <= residual_band
        assert abs(l0.eigenvalues[2 * p - 1] - 2.0) <= residual_band
        assert abs(l0.eigenvalues[2 * p] - 2.0) <= residual_band
        # convergence order measured where the grid resolves the turning layer
        n = spectral.resolving_grid(torus)
        coarse = spectral.known_eigenfunction_residuals(torus, n)
        fine = spectral.known_eigenfunction_residuals(torus, 2 * n)
        for rc, rf in zip(coarse, fine):
            order = math.log2(rc / rf)
            orders.append(order)
            assert 1.7 <= order <= 2.3, f"order {order} for {p}/{q} at n={n}"
    report(5, f"anchors at 2 within 10x residual; residual orders in "
              f"[{min(orders):.2f}, {max(orders):.2f}]")


def test_criterion_06_oscillation_pattern(tori):
    for (p, q), torus in tori.items():
        spectrum = spectral.eigen_low(spectral.assemble(torus, 0, 2048), 2 * p + 1)
        expected = [0] + [2 * (i // 2 + 1) for i in range(2 * p)]
        assert spectrum.zero_counts == expected, \
            f"zero counts {spectrum.zero_counts} != {expected} for {p}/{q}"
    report(6, "l = 0 eigenvector sign changes follow 0, 2, 2, ..., 2p, 2p exactly")


def test_criterion_07_geodesic_invariants(tori):
    worst = 0.0
    for torus in tori.values():
        profile = torus.profile
        worst = max(worst, profile.speed_error, profile.momentum_error)
        assert profile.speed_error < 1e-7
        assert profile.momentum_error < 1e-7
        assert profile.closure_phi_error < 1e-6
        assert profile.closure_theta_error < 1e-6
    report(7, f"unit speed and momentum conserved to {worst:.2e}; closure < 1e-6")


def test_criterion_08_theta_projection_zero_counts(tori):
    for (p, q), torus in tori.items():
        theta = torus.profile.theta[:-1]
        for f in (np.cos, np.sin):
            signs = np.sign(f(theta))
            signs = signs[signs != 0]
            changes = int(np.sum(signs != np.roll(signs, 1)))
            assert changes == 2 * p, f"{f.__name__}(theta) changes sign {changes} times"
    report(8, "cos(theta) and sin(theta) each change sign exactly 2p times")


def test_criterion_09_clifford_oracle(clifford):
    assert abs(clifford.profile.t0 - 2.0 * pi ** 2) <= 1e-8
    assert abs(clifford.lambda_value - 4.0 * pi ** 2) <= 1e-8
    spectrum = spectral.eigen_low(spectral.assemble(clifford, 0, 2048), 7)
    expected = [0.0, 2.0, 2.0, 8.0, 8.0, 18.0, 18.0]
    np.testing.assert_allclose(spectrum.eigenvalues, expected, atol=1e-3)
    report(9, "constant solution: t0 = 2 pi^2, Lambda = 4 pi^2, spectrum 2 m^2")


def test_criterion_10_monotonicity_suite(tori):
    grid = np.linspace(0.01, pi / 4.0, 50)
    values = [omega(a) for a in grid]
    assert all(b > a for a, b in zip(values, values[1:]))
    for torus in tori.values():
        ground = spectral.lambda0_monotone_check(torus, [0, 1, 2, 3], n_grid=2048)
        assert ground[2] > 2.0
    report(10, "omega strictly increasing; lambda_0(l) strictly increasing with "
               "lambda_0(2) > 2 for all five tori")
