import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from arcldp.equilibrium import (
    CASE_I,
    CASE_II,
    DEGENERATE,
    CircleConstraint,
    IntervalConstraint,
    circle_measure,
    classify_case,
    frostman_residuals,
    interval_measure,
    mass_deficit,
    potential,
    solve_alpha_interval,
)
from oracle_values import ALPHA, RATE

THETAS = [math.pi / 2, math.pi, 3 * math.pi / 2]
QS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class TestConstraints:
    @pytest.mark.parametrize("beta,q", [(-1.0, 0.5), (1.0, 0.5), (0.0, 0.0), (0.0, 1.0)])
    def test_interval_domain(self, beta, q):
        with pytest.raises(ValueError):
            IntervalConstraint(beta, q)

    @pytest.mark.parametrize("theta", [0.0, 2 * math.pi, -1.0])
    def test_circle_domain(self, theta):
        with pytest.raises(ValueError):
            CircleConstraint(theta, 0.5)

    def test_beta_exact_at_pi(self):
        assert CircleConstraint(math.pi, 0.3).beta == 0.0

    def test_classification(self):
        assert classify_case(IntervalConstraint(0.0, 0.5)) == DEGENERATE
        assert classify_case(IntervalConstraint(0.0, 0.6)) == CASE_I
        assert classify_case(IntervalConstraint(0.0, 0.4)) == CASE_II


class TestDegenerate:
    def test_arcsine(self):
        mu = interval_measure(IntervalConstraint(0.0, 0.5))
        assert mu.case == DEGENERATE and mu.alpha == 0.0
        x = np.linspace(-0.99, 0.99, 21)
        assert np.allclose(mu.density(x), 1 / (math.pi * np.sqrt(1 - x * x)), rtol=1e-14)
        assert potential(mu, 0.3) == pytest.approx(math.log(2), abs=1e-14)

    def test_uniform_circle(self):
        nu = circle_measure(CircleConstraint(math.pi, 0.5))
        psi = np.linspace(-math.pi, math.pi, 101)
        assert float(nu.density(math.pi / 2)) == 1 / (2 * math.pi)
        assert np.max(np.abs(nu.density(psi) - 1 / (2 * math.pi))) < 1e-14
        assert np.allclose(nu.cdf(psi), (psi + math.pi) / (2 * math.pi), atol=1e-14)


class TestAlpha:
    @pytest.mark.parametrize("key", sorted(ALPHA))
    def test_against_oracle(self, key):
        beta, q = key
        assert solve_alpha_interval(IntervalConstraint(beta, q)) == pytest.approx(ALPHA[key], abs=1e-12)

    @pytest.mark.parametrize("key", sorted(RATE))
    def test_circle_alpha(self, key):
        from arcldp.numerics import angle_value
        theta, q = key
        nu = circle_measure(CircleConstraint(angle_value(theta), q))
        assert nu.alpha == pytest.approx(RATE[key][0], abs=1e-12)

    @given(st.floats(-0.9, 0.9), st.floats(0.05, 0.95))
    def test_reflection(self, beta, q):
        a = solve_alpha_interval(IntervalConstraint(beta, q))
        b = solve_alpha_interval(IntervalConstraint(-beta, 1 - q))
        assert b == pytest.approx(-a, abs=1e-10)

    @given(st.floats(-0.9, 0.9), st.floats(0.05, 0.95))
    def test_gap_side(self, beta, q):
        c = IntervalConstraint(beta, q)
        a = solve_alpha_interval(c)
        case = classify_case(c)
        if case == CASE_I:
            assert -1 < a < beta
        elif case == CASE_II:
            assert beta < a < 1

    def test_deficit_monotone(self):
        c = IntervalConstraint(0.2, 0.7)
        a = np.linspace(-0.99, 0.19, 15)
        d = [mass_deficit(x, c) for x in a]
        assert np.all(np.diff(d) > 0)

    def test_deficit_outside_bracket(self):
        with pytest.raises(ValueError):
            mass_deficit(0.5, IntervalConstraint(0.2, 0.7))

    def test_alpha_moves_with_q(self):
        # more mass forced onto [beta, 1] pushes the gap further left
        alphas = [solve_alpha_interval(IntervalConstraint(0.0, q)) for q in (0.6, 0.7, 0.8, 0.9)]
        assert np.all(np.diff(alphas) < 0)


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("q", QS)
def test_mass_and_frostman(theta, q):
    nu = circle_measure(CircleConstraint(theta, q))
    assert nu.total_mass == pytest.approx(1.0, abs=1e-12)
    assert nu.constrained_mass == pytest.approx(q, abs=1e-12)
    rep = frostman_residuals(nu)
    assert rep.max_residual < 1e-12
    assert rep.gap_slack > -1e-12


class TestCircleGeometry:
    def test_case_i_support(self):
        nu = circle_measure(CircleConstraint(math.pi, 0.75))
        s = nu.support
        assert nu.case == CASE_I
        assert (s[0].left, s[0].right) == (-math.pi / 2, math.pi / 2)
        t = math.acos(nu.alpha)
        assert s[1].left == pytest.approx(t) and s[1].right == pytest.approx(2 * math.pi - t)

    def test_case_ii_support(self):
        nu = circle_measure(CircleConstraint(math.pi, 0.25))
        s = nu.support
        assert nu.case == CASE_II
        t = math.acos(nu.alpha)
        assert (s[0].left, s[0].right) == pytest.approx((-t, t))
        assert (s[1].left, s[1].right) == pytest.approx((math.pi / 2, 1.5 * math.pi))

    def test_density_vanishes_on_gap(self):
        nu = circle_measure(CircleConstraint(math.pi, 0.75))
        t = math.acos(nu.alpha)
        gap = np.linspace(math.pi / 2 + 1e-6, t - 1e-6, 50)
        assert np.all(nu.density(gap) == 0)
        assert np.all(nu.density(-gap) == 0)

    @pytest.mark.parametrize("theta,q", [(math.pi, 0.75), (math.pi / 2, 0.1), (1.5 * math.pi, 0.9)])
    def test_density_integrates_to_one(self, theta, q):
        nu = circle_measure(CircleConstraint(theta, q))
        total, arc = 0.0, 0.0
        for s in nu.support:
            mid, half = 0.5 * (s.left + s.right), 0.5 * (s.right - s.left)
            f = lambda t: float(nu.density(mid + half * math.cos(t))) * half * math.sin(t)
            v, _ = integrate.quad(f, 0, math.pi, limit=200)
            total += v
            if s.left >= -theta / 2 - 1e-12 and s.right <= theta / 2 + 1e-12:
                arc += v
        assert total == pytest.approx(1.0, abs=1e-8)
        if nu.case == CASE_I:
            assert arc == pytest.approx(q, abs=1e-8)

    def test_cdf_matches_quadrature(self):
        mu = interval_measure(IntervalConstraint(0.0, 0.75))
        for x in (-0.9, -0.5, 0.3, 0.9):
            exact, _ = integrate.quad(lambda s: float(mu.density(s)), -1, x,
                                      points=[mu.alpha, 0.0], limit=200)
            assert float(mu.cdf(x)) == pytest.approx(exact, abs=1e-10)

    @given(st.floats(0.3, 6.0), st.floats(0.05, 0.95))
    def test_cdf_monotone(self, theta, q):
        nu = circle_measure(CircleConstraint(theta, q))
        psi = np.linspace(-math.pi, math.pi, 400)
        F = nu.cdf(psi)
        assert F[0] == pytest.approx(0.0, abs=1e-12) and F[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(F) >= -1e-13)

    def test_circle_potential_direct(self):
        # potential of the circle measure at a point by direct quadrature
        nu = circle_measure(CircleConstraint(math.pi, 0.75))
        phi = 2.5
        total = 0.0
        for s in nu.support:
            mid, half = 0.5 * (s.left + s.right), 0.5 * (s.right - s.left)

            def f(t):
                psi = mid + half * math.cos(t)
                return (-math.log(abs(2 * math.sin(0.5 * (psi - phi))))
                        * float(nu.density(psi)) * half * math.sin(t))

            pts = [math.acos((phi - mid) / half)] if abs(phi - mid) < half else None
            v, _ = integrate.quad(f, 0, math.pi, points=pts, limit=200)
            total += v
        assert potential(nu, phi) == pytest.approx(total, abs=1e-9)

    def test_potential_accepts_unit_complex(self):
        nu = circle_measure(CircleConstraint(math.pi, 0.75))
        assert potential(nu, np.exp(1j * 0.4)) == pytest.approx(potential(nu, 0.4), abs=1e-15)


class TestPublishedForms:
    def test_arcsine_at_zero(self):
        mu = interval_measure(IntervalConstraint(0.0, 0.5))
        assert float(mu.density(0.0)) == pytest.approx(0.3183098862, abs=1e-10)

    def test_density_formula_case_i(self):
        mu = interval_measure(IntervalConstraint(0.0, 0.75))
        a = mu.alpha
        expected = math.sqrt(abs(0.5 - a)) / (math.pi * math.sqrt(abs(1.5 * 0.5 * (-0.5))))
        assert float(mu.density(0.5)) == pytest.approx(expected, rel=1e-14)

    def test_alpha_tends_to_left_end(self):
        assert solve_alpha_interval(IntervalConstraint(0.0, 0.999)) + 1 < 0.05

    def test_collapsed_right_component_limit(self):
        # beta -> 1 collapses the right component; compare with the limiting density
        mu = interval_measure(IntervalConstraint(0.999, 0.75))
        a = mu.alpha

        def limit_density(x, alpha):
            return np.sqrt(np.abs(x - alpha)) / (math.pi * np.sqrt(x + 1) * (1 - x))

        x = np.linspace(-0.99, a - 1e-3, 200)
        assert np.max(np.abs(mu.density(x) - limit_density(x, a))) < 1e-2
        # the limiting mass equation gives nearly the same free boundary
        def left_mass(alpha):
            f = lambda t: float(limit_density(np.array(-1 + (alpha + 1) * (1 - math.cos(t)) / 2), alpha)
                                * (alpha + 1) * math.sin(t) / 2)
            return integrate.quad(f, 0, math.pi, limit=200)[0]

        from scipy.optimize import brentq
        a_lim = brentq(lambda s: left_mass(s) - 0.25, -0.999, 0.99, xtol=1e-13)
        assert a == pytest.approx(a_lim, abs=1e-2)
