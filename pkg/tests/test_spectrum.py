import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from arcldp.numerics import PrecisionPolicy
from arcldp.spectrum import (
    CountQuery,
    PrecisionError,
    SpectrumResult,
    build_prolate_matrix,
    count_eigenvalues_below,
    counting_G,
    eigenvalues,
    g_n,
    kernel_hs_norm_quadrature,
    nystrom_check,
    sturm_count,
    tridiagonalize,
)
from oracle_values import EIGS_12_HALF_PI, EIGS_16_PI, SUM_P_1MP_16_PI

PI = Fraction(1)
THETAS = [Fraction(1, 2), Fraction(1), Fraction(3, 2)]


class TestMatrix:
    def test_one_by_one(self):
        m = build_prolate_matrix(1, PI)
        assert m.to_numpy().tolist() == [[0.5]]

    def test_two_by_two(self):
        a = build_prolate_matrix(2, PI).to_numpy()
        assert a[0, 0] == 0.5 and a[0, 1] == pytest.approx(1 / math.pi, rel=1e-16)

    @pytest.mark.parametrize("theta", [0.0, 2 * math.pi, 7.0])
    def test_domain(self, theta):
        with pytest.raises(ValueError):
            build_prolate_matrix(4, theta)

    def test_float_and_exact_agree(self):
        a = build_prolate_matrix(6, math.pi / 3).to_numpy()
        b = build_prolate_matrix(6, Fraction(1, 3)).to_numpy()
        assert np.allclose(a, b, atol=1e-16)

    def test_positive_definite_spectrum_in_unit_interval(self):
        for th in THETAS:
            ev = np.linalg.eigvalsh(build_prolate_matrix(12, th).to_numpy())
            assert ev.min() > -1e-15 and ev.max() < 1


class TestEigenvalues:
    def test_closed_form_2x2(self):
        r = eigenvalues(2, PI)
        with mp.workprec(r.bits_used):
            assert abs(r.eigenvalues[0] - (mpf(1) / 2 + 1 / mp.pi)) < mpf(2) ** (-r.bits_used + 8)
            assert abs(r.eigenvalues[1] - (mpf(1) / 2 - 1 / mp.pi)) < mpf(2) ** (-r.bits_used + 8)
        assert abs(float(r.eigenvalues[0]) - 0.8183098862) < 1e-10

    @pytest.mark.parametrize("n", [2, 3, 4, 8, 16, 32, 64])
    @pytest.mark.parametrize("theta", THETAS)
    def test_trace(self, n, theta):
        r = eigenvalues(n, theta)
        with mp.workprec(r.bits_used + 16):
            exact = n * mpf(theta.numerator) / theta.denominator / 2
            rel = abs(mpmath.fsum(r.eigenvalues) - exact) / exact
        assert rel <= mpf(2) ** -(r.bits_used - 10)

    def test_oracle_16_pi(self, spec16):
        with mp.workprec(200):
            for p, ref in zip(spec16.eigenvalues, EIGS_16_PI):
                assert abs(p - mpf(ref)) <= mpf("1e-24") * mpf(ref)

    def test_oracle_12_half_pi(self):
        r = eigenvalues(12, Fraction(1, 2))
        with mp.workprec(200):
            for p, ref in zip(r.eigenvalues, EIGS_12_HALF_PI):
                assert abs(p - mpf(ref)) <= mpf("1e-24") * mpf(ref)

    def test_nystrom_top5(self, spec16):
        ny = nystrom_check(16, PI, 256)
        assert np.max(np.abs(ny[:5] - spec16.as_float()[:5])) < 1e-8

    def test_nystrom_small_cases(self):
        assert nystrom_check(1, PI, 32)[0] == pytest.approx(0.5, abs=1e-10)
        ny = nystrom_check(2, PI, 64)
        assert ny == pytest.approx([0.5 + 1 / math.pi, 0.5 - 1 / math.pi], abs=1e-10)
        with pytest.raises(ValueError):
            nystrom_check(8, PI, 4)

    def test_variance_identity(self, spec16):
        # sum p(1-p) = trace - sum p^2 and sum p^2 is the squared kernel integral
        p = spec16.as_float()
        var = float(np.sum(p * (1 - p)))
        assert var == pytest.approx(SUM_P_1MP_16_PI, abs=1e-14)
        assert var == pytest.approx(8 - kernel_hs_norm_quadrature(16, PI), abs=1e-6)

    def test_strictly_decreasing_in_unit_interval(self, spec64):
        ev = spec64.eigenvalues
        assert all(a > b for a, b in zip(ev, ev[1:]))
        assert 0 < ev[-1] and ev[0] < 1

    def test_reflection_at_pi(self, spec64):
        # theta = pi: p_j + p_{n+1-j} = 1
        ev = spec64.eigenvalues
        with mp.workprec(spec64.bits_used):
            worst = max(abs(a + b - 1) for a, b in zip(ev, ev[::-1]))
        assert worst < mpf(2) ** -(spec64.bits_used - 12)

    @pytest.mark.parametrize("theta", THETAS)
    def test_clustering(self, theta):
        for n in (8, 16, 32, 64):
            r = eigenvalues(n, theta)
            big = sum(1 for p in r.eigenvalues if p > 0.5)
            assert abs(big - n * float(theta) / 2) <= 2 + 2 * math.log2(n)

    def test_certified_widths(self, spec64):
        floor = 1e-3 * mpmath.exp(-192)
        for p, w in zip(spec64.eigenvalues, spec64.widths):
            assert w <= max(mpf(2) ** -32 * p, floor)

    def test_brackets_contain_values(self, spec16):
        for p, (lo, hi) in zip(spec16.eigenvalues, spec16.brackets):
            assert lo <= p <= hi

    def test_exponents(self, spec16):
        lam = spec16.exponents()
        assert all(v >= 0 for v in lam)
        assert all(a <= b for a, b in zip(lam, lam[1:]))
        assert float(lam[-1]) == pytest.approx(-math.log(float(spec16.eigenvalues[-1]) / math.e) / 16)

    def test_json_round_trip(self, spec16):
        back = SpectrumResult.from_json(json.loads(json.dumps(spec16.to_json())))
        assert back.bits_used == spec16.bits_used and back.theta == PI
        for a, b in zip(back.eigenvalues, spec16.eigenvalues):
            assert abs(a - b) <= mpf(2) ** -(spec16.bits_used - 4) * b

    def test_precision_error_carries_context(self):
        with pytest.raises(PrecisionError) as err:
            eigenvalues(48, PI, policy=PrecisionPolicy.fixed(64), x_max=3.0)
        assert err.value.bits == 64


class TestCounts:
    def test_sturm_matches_list(self, spec64):
        m = build_prolate_matrix(64, PI)
        for t in np.logspace(-47, -0.01, 20):
            direct = sum(1 for p in spec64.eigenvalues if p < t)
            assert count_eigenvalues_below(m, t) == direct

    def test_trivial_thresholds(self):
        m = build_prolate_matrix(16, PI)
        assert count_eigenvalues_below(m, 1.0) == 16
        assert count_eigenvalues_below(m, mpf(2) ** -128) == 0
        with pytest.raises(ValueError):
            count_eigenvalues_below(m, 0.0)

    def test_half_threshold(self, spec16):
        m = build_prolate_matrix(16, PI)
        assert count_eigenvalues_below(m, 0.5) == sum(1 for p in spec16.eigenvalues if p < 0.5) == 8

    def test_sturm_count_bounds(self):
        d, e2 = tridiagonalize(build_prolate_matrix(10, PI), 128)
        with mp.workprec(128):
            assert sturm_count(d, e2, mpf(-1)) == 0
            assert sturm_count(d, e2, mpf(2)) == 10

    def test_counting_G_trivial(self):
        assert counting_G(CountQuery(-1.0, 16), PI) == 0
        assert counting_G(CountQuery(100.0, 8), PI) == 8

    def test_counting_G_vs_list(self, spec16):
        t = math.e * math.exp(-0.5 * 16)
        assert counting_G(CountQuery(0.5, 16), PI) == sum(1 for p in spec16.eigenvalues if p > t)

    def test_query_domain(self):
        with pytest.raises(ValueError):
            CountQuery(1.0, 16, C=1.0)
        with pytest.raises(ValueError):
            CountQuery(1.0, 0)

    def test_g_n_gap(self, spec16):
        lam = spec16.exponents()
        x = float((lam[7] + lam[8]) / 2)
        assert g_n(x, 16, PI) == 0.5
        assert g_n(0.0, 16, PI) == 0.0
        assert g_n(-2.0, 16, PI) == 0.0
        assert g_n(50.0, 16, PI) == 1.0

    @given(st.floats(-0.5, 3.0), st.floats(-0.5, 3.0))
    def test_G_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert counting_G(CountQuery(lo, 16), PI) <= counting_G(CountQuery(hi, 16), PI)
