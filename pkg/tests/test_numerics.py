import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from arcldp.numerics import (
    BracketError,
    PrecisionPolicy,
    QuadratureError,
    chebyshev_expansion,
    find_root_monotone,
    gauss_nodes,
    integrate_singular,
    integrate_singular_adaptive,
    log_potential,
    parse_angle,
    angle_value,
)


class TestPrecisionPolicy:
    def test_floor(self):
        assert PrecisionPolicy().bits(4, 0.1) == 128

    def test_scaling(self):
        # 1.6 * 64 * 3 / ln 2 = 443.2 -> 444, plus 64 guard bits
        assert PrecisionPolicy().bits(64, 3.0) == 508

    def test_fixed(self):
        p = PrecisionPolicy.fixed(300)
        assert p.bits(1, 0.0) == p.bits(500, 10.0) == 300

    def test_rejects_small_base(self):
        with pytest.raises(ValueError):
            PrecisionPolicy(base_bits=32)

    @given(st.integers(1, 200), st.floats(0, 10), st.floats(0, 10))
    def test_monotone_in_x(self, n, a, b):
        p = PrecisionPolicy()
        lo, hi = sorted((a, b))
        assert p.bits(n, lo) <= p.bits(n, hi)


class TestGauss:
    def test_chebyshev_closed_form(self):
        r = gauss_nodes(8, -0.5, -0.5)
        assert np.allclose(r.weights, math.pi / 8)
        assert np.all(np.diff(r.nodes) > 0)

    def test_degree(self):
        assert gauss_nodes(5).degree == 9

    def test_nodes_read_only(self):
        r = gauss_nodes(6, 0.5, -0.5)
        with pytest.raises(ValueError):
            r.nodes[0] = 0.0

    @pytest.mark.parametrize("el,er", [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.0, 0.0)])
    def test_jacobi_moments(self, el, er):
        # int_{-1}^{1} (1-x)^er (1+x)^el x^k dx, exact for k <= 2m-1
        r = gauss_nodes(6, el, er)
        for k in range(12):
            exact, _ = integrate.quad(lambda x: x ** k, -1, 1, weight="alg", wvar=(el, er))
            assert r.weights @ r.nodes ** k == pytest.approx(exact, abs=1e-13)

    def test_invalid(self):
        with pytest.raises(ValueError):
            gauss_nodes(0)
        with pytest.raises(ValueError):
            gauss_nodes(4, -1.0, 0.0)

    def test_mapped_interval(self):
        # int_0^2 x^2 / sqrt(x (2 - x)) dx = 3 pi / 2
        x, w = gauss_nodes(4, -0.5, -0.5).mapped(0.0, 2.0)
        assert w @ x ** 2 == pytest.approx(1.5 * math.pi, rel=1e-14)


class TestIntegrate:
    def test_arcsine_mass(self):
        v = integrate_singular(lambda x: np.ones_like(x) / math.pi, -1, 1, -0.5, -0.5, 4)
        assert v == pytest.approx(1.0, abs=1e-15)

    def test_sqrt_zero_endpoint(self):
        # int_0^1 sqrt(1 - x) dx = 2/3
        v = integrate_singular(lambda x: np.ones_like(x), 0, 1, 0.0, 0.5, 4)
        assert v == pytest.approx(2 / 3, abs=1e-15)

    def test_adaptive_smooth_factor(self):
        # int_{-1}^{1} e^x / sqrt(1 - x^2) dx = pi I_0(1)
        v = integrate_singular_adaptive(np.exp, -1, 1, -0.5, -0.5)
        assert v == pytest.approx(math.pi * special.i0(1.0), rel=1e-14)

    def test_empty_interval(self):
        with pytest.raises(ValueError):
            integrate_singular(np.exp, 1.0, 1.0, 0, 0, 4)

    def test_adaptive_gives_up(self):
        # a kink defeats polynomial convergence
        with pytest.raises(QuadratureError):
            integrate_singular_adaptive(lambda x: np.abs(x - 0.1234), -1, 1, 0.0, 0.0,
                                        tol=1e-15, m_max=64)


class TestRoot:
    def test_simple(self):
        assert find_root_monotone(lambda x: x ** 3 - 2, 0, 2) == pytest.approx(2 ** (1 / 3), abs=1e-12)

    def test_bracket_error(self):
        with pytest.raises(BracketError) as err:
            find_root_monotone(lambda x: x + 5, 0, 1)
        assert err.value.glo == 5 and err.value.ghi == 6


class TestChebyshev:
    def test_mass_is_pi_c0(self):
        e = chebyshev_expansion(np.cos, -1.0, 2.0)
        exact, _ = integrate.quad(lambda t: math.cos(0.5 + 1.5 * math.cos(t)), 0, math.pi)
        assert e.integral_dtau == pytest.approx(exact, abs=1e-14)

    def test_interpolant(self):
        e = chebyshev_expansion(np.exp, 0.0, 1.0)
        x = np.linspace(0, 1, 17)
        assert np.max(np.abs(e(x) - np.exp(x))) < 1e-14

    @pytest.mark.parametrize("z", [3.0, -2.5, 0.3, 1.0, -1.0, 0.2 + 0.7j])
    def test_log_potential_vs_quadrature(self, z):
        import mpmath
        g = lambda x: 1 + 0.3 * x + 0.1 * x ** 2
        e = chebyshev_expansion(g, -1.0, 1.0)
        zc = mpmath.mpc(z)

        def dist(t):
            # 1 -+ cos t written without cancellation at the endpoints
            if z == 1.0:
                return 2 * mpmath.sin(t / 2) ** 2
            if z == -1.0:
                return 2 * mpmath.cos(t / 2) ** 2
            return abs(zc - mpmath.cos(t))

        f = lambda t: -mpmath.log(dist(t)) * g(mpmath.cos(t))
        pts = [0, math.acos(z), math.pi] if isinstance(z, float) and -1 < z < 1 else [0, math.pi]
        exact = float(mpmath.quad(f, pts))
        assert float(np.real(log_potential(e, z))) == pytest.approx(exact, abs=1e-13)

    def test_arcsine_potential_constant(self):
        # the arcsine law has potential log 2 on [-1, 1]
        e = chebyshev_expansion(lambda x: np.full_like(x, 1 / math.pi), -1.0, 1.0)
        x = np.linspace(-1, 1, 11)
        assert np.allclose(log_potential(e, x), math.log(2), atol=1e-15)


class TestAngles:
    @pytest.mark.parametrize("text,value", [
        ("pi", Fraction(1)), ("pi/2", Fraction(1, 2)), ("2pi/3", Fraction(2, 3)),
        ("3*pi/2", Fraction(3, 2)), ("-pi/2", Fraction(-1, 2)), ("PI", Fraction(1)),
    ])
    def test_tokens(self, text, value):
        assert parse_angle(text) == value

    def test_decimal(self):
        assert parse_angle("1.25") == 1.25
        assert angle_value("pi/4") == math.pi / 4

    def test_garbage(self):
        with pytest.raises(ValueError):
            parse_angle("tau")
