import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ellipe as sp_ellipe
from scipy.special import ellipk as sp_ellipk
from scipy.special import jv

from dickesim.specfun import (bessel_j_array, elliptic_e, elliptic_ke,
                              elliptic_ke_complement)


def j_series(k, x, terms=40):
    # independent ascending-series oracle
    s = 0.0
    for m in range(terms):
        s += (-1) ** m * (x / 2.0) ** (2 * m + k) / (
            math.factorial(m) * math.factorial(m + k))
    return s


class TestBessel:
    def test_x_zero(self):
        out = bessel_j_array(0.0, 6)
        assert out[0] == 1.0
        assert np.all(out[1:] == 0.0)

    def test_against_series_oracle_x1(self):
        out = bessel_j_array(1.0, 3)
        assert out[0] == pytest.approx(j_series(0, 1.0), abs=1e-14)
        assert out[1] == pytest.approx(j_series(1, 1.0), abs=1e-14)
        # frozen series values
        assert out[0] == pytest.approx(0.7651976865579666, abs=1e-15)
        assert out[1] == pytest.approx(0.4400505857449335, abs=1e-15)

    @pytest.mark.parametrize("x", [1.0, 10.0, 50.0])
    def test_normalisation_identity(self, x):
        out = bessel_j_array(x, int(x) + 60)
        s = out[0] + 2.0 * np.sum(out[2::2])
        assert abs(s - 1.0) < 1e-13
        # series oracle only at small x: the alternating series loses
        # ~x/ln(10) digits to cancellation in float64
        if x <= 10.0:
            tol = 1e-13 if x <= 1.0 else 1e-9
            for k in range(3):
                assert out[k] == pytest.approx(j_series(k, x, terms=60), abs=tol)

    @pytest.mark.parametrize("x", [0.3, 1.0, 2.5, 10.0, 25.0, 50.0, 137.0])
    def test_against_scipy(self, x):
        k_max = int(x) + 40
        out = bessel_j_array(x, k_max)
        ref = jv(np.arange(k_max + 1), x)
        assert np.max(np.abs(out - ref)) < 1e-13

    def test_high_precision_oracle(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        for x in (0.7, 10.0, 33.3):
            out = bessel_j_array(x, 20)
            for k in (0, 1, 5, 20):
                ref = float(mp.besselj(k, x))
                assert abs(out[k] - ref) <= 1e-14 * max(1.0, abs(ref) * 10) + 1e-15

    def test_superexponential_decay(self):
        for x in (5.0, 20.0, 80.0):
            k_cut = int(x + 10 * x ** (1.0 / 3.0))
            out = bessel_j_array(x, k_cut + 25)
            assert np.all(np.abs(out[k_cut:]) < 1e-6)
            assert abs(out[-1]) < 1e-14

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            bessel_j_array(-1.0, 3)
        with pytest.raises(ValueError):
            bessel_j_array(1.0, -1)


class TestElliptic:
    def test_kappa_zero(self):
        big_k, big_e = elliptic_ke(0.0)
        assert big_k == pytest.approx(math.pi / 2, abs=1e-15)
        assert big_e == pytest.approx(math.pi / 2, abs=1e-15)

    def test_legendre_relation(self):
        # E K' + E' K - K K' = pi/2 at kappa = 0.6 (complementary 0.8)
        big_k, big_e = elliptic_ke(0.6)
        big_kc, big_ec = elliptic_ke(0.8)
        lhs = big_e * big_kc + big_ec * big_k - big_k * big_kc
        assert abs(lhs - math.pi / 2) < 1e-13

    def test_frozen_values(self):
        big_k, big_e = elliptic_ke(0.6)
        # mpmath reference, 30 digits
        assert big_k == pytest.approx(1.750753802915752529, rel=1e-14)
        assert big_e == pytest.approx(1.418083394448724232, rel=1e-14)

    def test_monotonicity(self):
        grid = np.linspace(0.0, 0.999, 40)
        ks, es = zip(*(elliptic_ke(k) for k in grid))
        assert np.all(np.diff(ks) > 0)
        assert np.all(np.diff(es) < 0)

    def test_log_divergence(self):
        # K ~ log(4/kappa') as kappa -> 1
        for comp in (1e-4, 1e-8, 1e-12):
            big_k, big_e = elliptic_ke_complement(comp)
            assert big_k == pytest.approx(math.log(4.0 / comp), rel=1e-6)
            assert big_e == pytest.approx(1.0, rel=1e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            elliptic_ke(1.0)
        with pytest.raises(ValueError):
            elliptic_ke(-0.1)
        with pytest.raises(ValueError):
            elliptic_ke_complement(0.0)
        assert elliptic_e(1.0) == 1.0

    @given(st.floats(min_value=0.0, max_value=0.999))
    @settings(max_examples=60, deadline=None)
    def test_against_scipy(self, kappa):
        big_k, big_e = elliptic_ke(kappa)
        assert big_k == pytest.approx(sp_ellipk(kappa ** 2), rel=1e-12)
        assert big_e == pytest.approx(sp_ellipe(kappa ** 2), rel=1e-12)

    def test_complement_consistency(self):
        for kappa in (0.1, 0.5, 0.9, 0.99):
            direct = elliptic_ke(kappa)
            via_comp = elliptic_ke_complement(math.sqrt(1 - kappa ** 2))
            assert direct[0] == pytest.approx(via_comp[0], rel=1e-13)
            assert direct[1] == pytest.approx(via_comp[1], rel=1e-13)
