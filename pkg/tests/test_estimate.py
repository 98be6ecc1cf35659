"""Estimator tests on synthetic data with exactly known answers.

The key oracle: Gaussian vectors with covariance equal to the inverse of a
symmetric tridiagonal circulant, generated by solving against a Cholesky
factor, so every lag covariance is known from the circulant module.
"""

import math

import numpy as np
import pytest

from coulomb_chain.circulant import SymTriCirculant, circulant_inverse_row
from coulomb_chain.energy import ModelParams
from coulomb_chain.estimate import (
    CovEstimate,
    GaussianZ,
    NormalityCheck,
    ScalingFit,
    correlation_estimates,
    gaussian_crosscheck,
    lag_covariances,
    mean_with_se,
    normality_check,
    scaling_fit,
    sign_pattern,
)
from coulomb_chain.theory import (
    cov_prediction,
    lambda_unbiased,
    predicted_cov,
    uniform_hessian,
)


def dense_circulant(m: SymTriCirculant) -> np.ndarray:
    a = np.zeros((m.n, m.n))
    for i in range(m.n):
        a[i, i] = m.c
        a[i, (i + 1) % m.n] = m.b
        a[(i + 1) % m.n, i] = m.b
    return a


def gaussian_with_inverse_cov(m: SymTriCirculant, rows: int, seed: int):
    """Draw `rows` iid vectors with covariance inv(dense(m))."""
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(dense_circulant(m))
    z = rng.standard_normal((rows, m.n))
    return np.linalg.solve(chol.T, z.T).T


class TestLagCovariances:
    def test_matches_known_circulant_covariance(self):
        m = SymTriCirculant(c=2.5, b=0.8, n=32)
        y = gaussian_with_inverse_cov(m, 6000, seed=21)
        truth = circulant_inverse_row(m)
        ests = lag_covariances(y, 6, circular=True)
        assert [e.lag for e in ests] == list(range(7))
        for e in ests:
            assert not e.degenerate
            assert abs(e.value - truth[e.lag]) <= 3.0 * e.se

    def test_constant_input_degenerate(self):
        samples = np.full((400, 8), 0.125)
        ests = lag_covariances(samples, 3, circular=True)
        for e in ests:
            assert e.degenerate
            assert e.value == 0.0
            assert e.se == 0.0

    def test_input_validation(self):
        good = np.random.default_rng(0).random((400, 8))
        with pytest.raises(ValueError):
            lag_covariances(good[:50], 2)
        with pytest.raises(ValueError):
            lag_covariances(good, 5)  # > n/2
        with pytest.raises(ValueError):
            lag_covariances(good, 2, n_chains=7)  # 400 % 7 != 0
        with pytest.raises(ValueError):
            lag_covariances(good[:100], 2, n_chains=50)  # 2 rows per chain

    def test_n_eff_near_row_count_for_iid_rows(self):
        rng = np.random.default_rng(5)
        y = rng.standard_normal((4000, 6))
        est = lag_covariances(y, 0)[0]
        assert 2000 <= est.n_eff <= 8000

    def test_se_shrinks_like_sqrt_of_length(self):
        rng = np.random.default_rng(17)
        sizes = [1000, 4000, 16000, 64000]
        ses = []
        for m in sizes:
            y = rng.standard_normal((m, 4))
            ses.append(lag_covariances(y, 0, n_batches=50)[0].se)
        slope, _ = np.polyfit(np.log(sizes), np.log(ses), 1)
        assert slope == pytest.approx(-0.5, abs=0.05)

    def test_cyclic_vs_single_origin_consistent(self):
        m = SymTriCirculant(c=2.5, b=0.8, n=24)
        y = gaussian_with_inverse_cov(m, 4000, seed=23)
        cyc = lag_covariances(y, 3, circular=True)
        d = y - y.mean(axis=0)
        for lag in range(1, 4):
            series = d[:, 0] * d[:, lag]
            batches = series[: 4000 - 4000 % 20].reshape(20, -1).mean(axis=1)
            v_single = float(batches.mean())
            se_single = float(batches.std(ddof=1)) / math.sqrt(20)
            assert abs(cyc[lag].value - v_single) <= 3.0 * se_single

    def test_multichain_batching_is_deterministic(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal((2000, 8))
        a = lag_covariances(y, 2, n_chains=4)
        b = lag_covariances(y, 2, n_chains=4)
        assert a == b


class TestCorrelations:
    def test_lag_zero_is_unit_and_ratios_match(self):
        m = SymTriCirculant(c=3.0, b=1.0, n=16)
        y = gaussian_with_inverse_cov(m, 8000, seed=31)
        truth = circulant_inverse_row(m)
        corr = correlation_estimates(y, 4, circular=True)
        assert corr[0].value == 1.0 and corr[0].degenerate
        for e in corr[1:]:
            assert abs(e.value - truth[e.lag] / truth[0]) <= 3.0 * e.se

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            correlation_estimates(np.ones((400, 8)), 2)


class TestMeanWithSe:
    def test_iid_site_means(self):
        rng = np.random.default_rng(41)
        y = 0.5 + 0.01 * rng.standard_normal((4000, 10))
        mean, se = mean_with_se(y)
        assert mean.shape == se.shape == (10,)
        assert np.all(se > 0)
        assert np.max(np.abs(mean - 0.5) / se) <= 4.0


class TestScalingFit:
    def test_exact_cubic_law(self):
        pts = [(n, n ** -3.0) for n in (16, 32, 64, 128)]
        fit = scaling_fit(pts)
        assert isinstance(fit, ScalingFit)
        assert fit.slope == pytest.approx(-3.0, abs=1e-12)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)

    def test_slowly_corrected_law_stays_near_cubic(self):
        pts = [(n, 0.4 * n ** -3.0 * (1 + 1.0 / n)) for n in (16, 32, 64, 128, 256)]
        fit = scaling_fit(pts)
        assert -3.1 < fit.slope < -2.9

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            scaling_fit([(16, 1e-3), (32, -1e-4), (64, 1e-5)])
        with pytest.raises(ValueError):
            scaling_fit([(16, 1e-3), (16, 2e-3), (16, 3e-3)])


class TestSignPattern:
    @staticmethod
    def _exact_estimates(p, conditional, max_lag):
        out = []
        for lag in range(max_lag + 1):
            v = predicted_cov(p, lag, conditional=conditional)
            out.append(CovEstimate(lag, v, abs(v) * 1e-3 + 1e-300, 1e6))
        return out

    def test_unconditional_alternation(self):
        p = ModelParams(1.0, 1.0, 100)
        rep = sign_pattern(self._exact_estimates(p, False, 5), p)
        assert rep.all_consistent
        assert [e.observed for e in rep.entries] == ["+", "-", "+", "-", "+", "-"]
        assert [e.predicted for e in rep.entries] == ["+", "-", "+", "-", "+", "-"]

    def test_conditional_small_n_flips_lag_two(self):
        p16 = ModelParams(1.0, 1.0, 16)
        rep = sign_pattern(self._exact_estimates(p16, True, 2), p16, conditional=True)
        assert rep.entries[2].predicted == "-"
        assert rep.all_consistent
        p512 = ModelParams(1.0, 1.0, 512)
        rep = sign_pattern(
            self._exact_estimates(p512, True, 2), p512, conditional=True
        )
        assert rep.entries[2].predicted == "+"

    def test_noisy_estimates_are_indistinguishable_but_consistent(self):
        p = ModelParams(1.0, 1.0, 64)
        noisy = [CovEstimate(1, 1e-9, 1e-6, 100.0)]
        rep = sign_pattern(noisy, p)
        assert rep.entries[0].observed == "0"
        assert rep.all_consistent

    def test_contradiction_detected(self):
        p = ModelParams(1.0, 1.0, 64)
        wrong = [CovEstimate(1, 5e-6, 1e-8, 100.0)]  # lag-1 should be negative
        rep = sign_pattern(wrong, p)
        assert not rep.all_consistent


class _StubRun:
    def __init__(self, samples, n_chains=1):
        self.samples = samples
        self.chain_stats = tuple(range(n_chains))


class TestGaussianCrosscheck:
    def test_synthetic_gaussian_agrees_with_inverse_row(self):
        p = ModelParams(1.0, 1.0, 32)
        lam = lambda_unbiased(p)
        m = uniform_hessian(p, lam)
        y = gaussian_with_inverse_cov(m, 8000, seed=51) + 1.0 / p.n
        report = gaussian_crosscheck(p, lam, _StubRun(y))
        assert len(report) == 6
        truth = circulant_inverse_row(m)
        for entry in report:
            assert isinstance(entry, GaussianZ)
            assert entry.truth == truth[entry.lag]
            assert abs(entry.z) <= 3.0

    def test_independent_sites_have_null_lags(self):
        p = ModelParams(1.0, 0.0, 24)
        lam = lambda_unbiased(p)
        m = uniform_hessian(p, lam)
        rng = np.random.default_rng(52)
        y = rng.standard_normal((6000, p.n)) / math.sqrt(m.c) + 1.0 / p.n
        report = gaussian_crosscheck(p, lam, _StubRun(y))
        for entry in report[1:]:
            assert entry.truth == 0.0
            assert abs(entry.z) <= 3.0


class TestNormality:
    def test_normal_passes(self):
        rng = np.random.default_rng(61)
        check = normality_check(rng.standard_normal(2000))
        assert isinstance(check, NormalityCheck)
        assert check.threshold == pytest.approx(1.36 / math.sqrt(2000) + 0.03)
        assert check.passed

    def test_cauchy_fails(self):
        rng = np.random.default_rng(62)
        check = normality_check(rng.standard_cauchy(2000))
        assert not check.passed

    def test_too_few_or_degenerate(self):
        rng = np.random.default_rng(63)
        with pytest.raises(ValueError):
            normality_check(rng.standard_normal(500))
        with pytest.raises(ValueError):
            normality_check(np.zeros(2000))


class TestCovEstimateType:
    def test_validation(self):
        with pytest.raises(ValueError):
            CovEstimate(0, math.nan, 1.0, 10.0)
        with pytest.raises(ValueError):
            CovEstimate(0, 1.0, -1.0, 10.0)
        with pytest.raises(ValueError):
            CovEstimate(0, 1.0, 0.0, 10.0)  # zero se needs degenerate
        ok = CovEstimate(0, 1.0, 0.0, 10.0, degenerate=True)
        assert ok.se == 0.0


class TestTheoryConsistencyHook:
    def test_prediction_amplitude_matches_inverse_row_scale(self):
        # the two theory routes to the lag-0 variance must agree, so the
        # crosscheck truth and the prediction are mutually consistent
        p = ModelParams(1.0, 1.0, 48)
        lam = lambda_unbiased(p)
        row = circulant_inverse_row(uniform_hessian(p, lam))
        pred = cov_prediction(p)
        assert row[0] == pytest.approx(
            pred.variance_amplitude / p.n**3, rel=1e-6
        )
