"""Closed-form prediction checks.

The central algebraic facts verified here:
  * delta = gamma/(4 beta + gamma + 2 sqrt(4 beta^2 + 2 beta gamma))
  * eta (the minimizer boundary decay base) equals delta identically
  * under the uniform-point Hessian parametrization c=(2b+g/2)/a^3,
    b=g/(4a^3), the inverse-row decay ratio b/x1 also equals delta
  * the variance amplitude and the conditional -1/N correction
"""

import math

import numpy as np
import pytest

from coulomb_chain.circulant import inverse_row_asymptotic
from coulomb_chain.energy import ModelParams, gradient, hessian
from coulomb_chain.theory import (
    CovPrediction,
    a_star,
    chain_edge_factor,
    cov_prediction,
    delta,
    eta,
    lambda_unbiased,
    predicted_cov,
    predicted_var_of_sum,
    uniform_hessian,
)


def grid_params(n=24):
    out = []
    for beta in (0.5, 1.0, 2.0):
        for gamma in np.arange(0.0, beta + 1e-9, beta / 10):
            out.append(ModelParams(beta, float(gamma), n))
    return out


class TestDelta:
    def test_gamma_zero(self):
        assert delta(ModelParams(1.0, 0.0, 8)) == 0.0

    def test_beta_gamma_one(self):
        # 1/(5 + 2 sqrt 6), equivalently 5 - 2 sqrt 6.
        d = delta(ModelParams(1.0, 1.0, 8))
        assert d == pytest.approx(1.0 / (5 + 2 * math.sqrt(6)), rel=1e-15)
        assert d == pytest.approx(5 - 2 * math.sqrt(6), rel=1e-13)
        assert d == pytest.approx(0.1010205, abs=5e-8)

    def test_half_gamma(self):
        d = delta(ModelParams(1.0, 0.5, 8))
        assert d == pytest.approx(0.5 / (4.5 + 2 * math.sqrt(5)), rel=1e-15)
        assert d == pytest.approx(0.0557281, abs=5e-8)

    def test_range(self):
        for p in grid_params():
            d = delta(p)
            assert 0 <= d < 1
            assert (d == 0) == (p.gamma == 0)


class TestEta:
    def test_beta_gamma_one(self):
        assert eta(ModelParams(1.0, 1.0, 8)) == pytest.approx(5 - math.sqrt(24), rel=1e-13)

    def test_gamma_zero_boundary(self):
        assert eta(ModelParams(1.0, 0.0, 8)) == 0.0

    def test_stiff_limit(self):
        # beta/gamma -> infinity drives the boundary layer width to zero.
        assert eta(ModelParams(1.0, 1e-9, 8)) < 1e-9

    def test_identity_with_delta_on_grid(self):
        for p in grid_params():
            assert abs(eta(p) - delta(p)) <= 1e-14


class TestAStar:
    def test_unit_value(self):
        assert a_star(ModelParams(1.0, 1.0, 8), 1.5) == pytest.approx(1.0, rel=1e-15)

    def test_quarter_lambda_doubles(self):
        p = ModelParams(1.2, 0.3, 8)
        assert a_star(p, 0.5) == pytest.approx(2 * a_star(p, 2.0), rel=1e-14)

    def test_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            a_star(ModelParams(1.0, 1.0, 8), 0.0)

    def test_gradient_zero_at_uniform(self):
        p = ModelParams(1.0, 0.7, 10)
        lam = 3.3
        a = a_star(p, lam)
        g = gradient(np.full(10, a), p, lam=lam, circular=True)
        assert np.max(np.abs(g)) < 1e-12 * lam


class TestLambdaUnbiased:
    def test_value(self):
        assert lambda_unbiased(ModelParams(1.0, 1.0, 100)) == pytest.approx(15000.0)

    def test_inverts_to_mean_spacing(self):
        p = ModelParams(0.8, 0.2, 64)
        assert a_star(p, lambda_unbiased(p)) == pytest.approx(1 / 64, rel=1e-15)

    def test_quadratic_scaling(self):
        lo = lambda_unbiased(ModelParams(1.0, 0.5, 50))
        hi = lambda_unbiased(ModelParams(1.0, 0.5, 100))
        assert hi == pytest.approx(4 * lo, rel=1e-15)


class TestPredictedCov:
    def test_lag0_amplitude(self):
        p = ModelParams(1.0, 1.0, 100)
        # 2 beta + gamma (1-delta)/2 = sqrt 6 at beta=gamma=1.
        d = delta(p)
        assert 2 + (1 - d) / 2 == pytest.approx(math.sqrt(6), rel=1e-14)
        assert predicted_cov(p, 0) == pytest.approx(1e-6 / math.sqrt(6), rel=1e-13)
        assert predicted_cov(p, 0) == pytest.approx(4.0825e-7, abs=1e-11)

    def test_lag1_negative(self):
        p = ModelParams(1.0, 1.0, 100)
        exact = -1e-6 / math.sqrt(6) * delta(p)
        assert predicted_cov(p, 1) == pytest.approx(exact, rel=1e-14)
        assert predicted_cov(p, 1) == pytest.approx(-4.124e-8, abs=5e-12)

    def test_gamma_zero(self):
        p = ModelParams(1.0, 0.0, 10)
        assert predicted_cov(p, 0) == pytest.approx(1e-3 / 2, rel=1e-14)
        for lag in (1, 2, 3):
            assert predicted_cov(p, lag) == 0.0

    def test_sign_alternation(self):
        p = ModelParams(1.0, 0.8, 200)
        for lag in range(6):
            assert math.copysign(1, predicted_cov(p, lag)) == (-1.0) ** lag

    def test_conditional_correction(self):
        p = ModelParams(1.0, 1.0, 16)
        d = delta(p)
        amp = 1.0 / (2 + (1 - d) / 2)
        corr = (1 / 16) * (1 - d) / (1 + d)
        want = 16.0**-3 * amp * (d * d - corr)
        assert predicted_cov(p, 2, conditional=True) == pytest.approx(want, rel=1e-14)
        # At N=16 the correction dominates delta^2: conditional lag-2 < 0.
        assert predicted_cov(p, 2, conditional=True) < 0
        # At N=512 it does not: conditional lag-2 > 0.
        assert predicted_cov(ModelParams(1.0, 1.0, 512), 2, conditional=True) > 0

    def test_lag_bounds(self):
        p = ModelParams(1.0, 1.0, 10)
        predicted_cov(p, 5)
        with pytest.raises(ValueError):
            predicted_cov(p, 6)
        with pytest.raises(ValueError):
            predicted_cov(p, -1)


class TestCovPrediction:
    def test_fields(self):
        p = ModelParams(1.0, 1.0, 100)
        cp = cov_prediction(p)
        assert isinstance(cp, CovPrediction)
        assert cp.n == 100
        assert cp.delta == delta(p)
        assert cp.variance_amplitude == pytest.approx(1 / math.sqrt(6), rel=1e-14)
        assert cp.conditional_correction == pytest.approx(
            0.01 * (1 - cp.delta) / (1 + cp.delta), rel=1e-14
        )

    def test_gamma_zero_amplitude(self):
        cp = cov_prediction(ModelParams(2.0, 0.0, 50))
        assert cp.variance_amplitude == pytest.approx(0.25, rel=1e-15)


class TestVarOfSum:
    def test_gamma_zero(self):
        p = ModelParams(1.0, 0.0, 32)
        lam = 7.0
        a = a_star(p, lam)
        assert predicted_var_of_sum(p, lam) == pytest.approx(32 * a**3 / 2, rel=1e-13)

    def test_unbiased_beta_gamma_one_is_third(self):
        # (1/sqrt6) * (1-delta)/(1+delta) collapses to exactly 1/3.
        p = ModelParams(1.0, 1.0, 64)
        got = predicted_var_of_sum(p, lambda_unbiased(p))
        assert got == pytest.approx((1 / 3) * 64.0**-2, rel=1e-13)

    def test_positive_on_grid(self):
        for p in grid_params():
            assert predicted_var_of_sum(p, lambda_unbiased(p)) > 0


class TestEdgeFactor:
    def test_bulk_envelope(self):
        p = ModelParams(1.0, 1.0, 128)
        f = chain_edge_factor(p, 30, 60)
        assert f.informative
        assert f.envelope <= math.exp(-2) + 1e-12

    def test_edge_flagged(self):
        p = ModelParams(1.0, 1.0, 128)
        f = chain_edge_factor(p, 1, 64)
        assert not f.informative

    def test_alpha_default_consistent_with_eta(self):
        p = ModelParams(1.0, 1.0, 128)
        f = chain_edge_factor(p, 10, 64)
        assert f.envelope == pytest.approx(eta(p) ** 10, rel=1e-12)

    def test_bad_indices(self):
        p = ModelParams(1.0, 1.0, 16)
        with pytest.raises(ValueError):
            chain_edge_factor(p, 5, 3)
        with pytest.raises(ValueError):
            chain_edge_factor(p, 0, 3)


class TestCrossModule:
    def test_uniform_hessian_matches_energy_hessian(self):
        p = ModelParams(1.0, 0.9, 12)
        lam = 40.0
        a = a_star(p, lam)
        m = uniform_hessian(p, lam)
        h = hessian(np.full(12, a), p, circular=True)
        assert np.allclose(h.diag, m.c, rtol=1e-13)
        assert np.allclose(h.off, m.b, rtol=1e-13)
        assert h.corner == pytest.approx(m.b, rel=1e-13)

    def test_ratio_equals_delta_on_grid(self):
        for p in grid_params():
            if p.gamma == 0:
                continue
            m = uniform_hessian(p, lambda_unbiased(p))
            _, ratio = inverse_row_asymptotic(m)
            assert abs(ratio - delta(p)) <= 1e-14

    def test_lambda11_limit_equals_amplitude_scaling(self):
        for p in grid_params():
            lam = lambda_unbiased(p)
            m = uniform_hessian(p, lam)
            lam11, _ = inverse_row_asymptotic(m)
            a = a_star(p, lam)
            want = a**3 * cov_prediction(p).variance_amplitude
            assert lam11 == pytest.approx(want, rel=1e-12)
