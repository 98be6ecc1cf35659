"""Statistical post-processing of spacing samples.

All estimators are pure functions of the sample arrays they are given
(rows = recorded states, columns = sites).  Errors come from batch means:
each chain's rows are cut into 20 equal contiguous batches and batch
averages are treated as independent.  Centering always uses the per-site
mean over the whole input; per-row centering would subtract the sum
fluctuation and corrupt the lag structure.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import math

import numpy as np
from scipy import stats as sps

from .circulant import circulant_inverse_row
from .energy import ModelParams
from .theory import predicted_cov, uniform_hessian

DEFAULT_BATCHES = 20
MIN_SAMPLES = 100


@dataclass(frozen=True)
class CovEstimate:
    """A lag covariance with its batch-means standard error.

    n_eff is the effective number of independent rows behind the estimate
    (plain variance over rows divided by the squared standard error).
    degenerate marks inputs with no variance at all, where se = 0.
    """

    lag: int
    value: float
    se: float
    n_eff: float
    degenerate: bool = False

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("covariance estimate must be finite")
        if self.se < 0.0 or (self.se == 0.0 and not self.degenerate):
            raise ValueError("se must be positive unless degenerate")


def _check_input(samples, max_lag):
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array (rows = states)")
    m, n = samples.shape
    if m < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {m}")
    if not 0 <= max_lag <= n // 2:
        raise ValueError("max_lag must lie in [0, n/2]")
    return samples


def _lag_series(samples, max_lag, circular):
    """Per-row spatially averaged lag products, centered at the global
    per-site means: series[t, l] estimates Cov(x_j, x_{j+l}) from row t."""
    d = samples - samples.mean(axis=0)
    m, n = d.shape
    series = np.empty((m, max_lag + 1))
    for lag in range(max_lag + 1):
        if circular:
            series[:, lag] = (d * np.roll(d, -lag, axis=1)).mean(axis=1)
        else:
            if lag == 0:
                series[:, lag] = (d * d).mean(axis=1)
            else:
                series[:, lag] = (d[:, :-lag] * d[:, lag:]).mean(axis=1)
    return series


def _batch_means(series, n_chains, n_batches):
    """Cut rows into n_chains segments of n_batches equal batches each;
    return (batch_value_matrix, retained_row_mask_length_per_segment)."""
    m = series.shape[0]
    if n_chains < 1 or m % n_chains != 0:
        raise ValueError("rows must split evenly into chains")
    seg = m // n_chains
    length = seg // n_batches
    if length < 1:
        raise ValueError(
            f"too few samples for {n_batches} batches per chain"
        )
    batches = []
    for c in range(n_chains):
        for b in range(n_batches):
            lo = c * seg + b * length
            batches.append(series[lo : lo + length].mean(axis=0))
    return np.asarray(batches), length


def lag_covariances(
    samples,
    max_lag: int,
    *,
    circular: bool = False,
    n_chains: int = 1,
    n_batches: int = DEFAULT_BATCHES,
) -> list:
    """Estimate Cov(x_j, x_{j+lag}) for lag = 0..max_lag.

    The spatial average runs over all site pairs at the given lag
    (cyclically when circular).  Batch-means standard errors; rows left
    over after equal batching are ignored for both value and error.
    """
    samples = _check_input(samples, max_lag)
    series = _lag_series(samples, max_lag, circular)
    batches, length = _batch_means(series, n_chains, n_batches)
    nb = batches.shape[0]
    values = batches.mean(axis=0)

    out = []
    for lag in range(max_lag + 1):
        retained = series[:, lag]  # plain variance uses all rows
        plain_var = float(np.var(retained, ddof=1))
        sd = float(np.std(batches[:, lag], ddof=1))
        se = sd / math.sqrt(nb)
        if plain_var == 0.0 or se == 0.0:
            out.append(
                CovEstimate(lag, float(values[lag]), 0.0, float(len(retained)), True)
            )
        else:
            out.append(
                CovEstimate(lag, float(values[lag]), se, plain_var / se**2)
            )
    return out


def correlation_estimates(
    samples,
    max_lag: int,
    *,
    circular: bool = False,
    n_chains: int = 1,
    n_batches: int = DEFAULT_BATCHES,
) -> list:
    """Lag correlations value = cov(lag)/cov(0), with batch-ratio errors.

    The amplitude cancels in the ratio, which makes this the statistic of
    choice for comparing against a pure decay law.  Lag 0 is identically 1
    and reported degenerate.
    """
    samples = _check_input(samples, max_lag)
    series = _lag_series(samples, max_lag, circular)
    batches, _ = _batch_means(series, n_chains, n_batches)
    nb = batches.shape[0]
    total = batches.mean(axis=0)
    if total[0] <= 0.0:
        raise ValueError("zero variance input: correlations undefined")

    out = [CovEstimate(0, 1.0, 0.0, float(series.shape[0]), True)]
    for lag in range(1, max_lag + 1):
        ratios = batches[:, lag] / batches[:, 0]
        value = float(total[lag] / total[0])
        sd = float(np.std(ratios, ddof=1))
        se = sd / math.sqrt(nb)
        if se == 0.0:
            out.append(CovEstimate(lag, value, 0.0, float(nb), True))
        else:
            out.append(
                CovEstimate(
                    lag, value, se, float(np.var(ratios, ddof=1)) / se**2
                )
            )
    return out


def mean_with_se(
    samples,
    *,
    n_chains: int = 1,
    n_batches: int = DEFAULT_BATCHES,
):
    """Per-site means and batch-means standard errors."""
    samples = _check_input(samples, 0)
    batches, _ = _batch_means(samples, n_chains, n_batches)
    nb = batches.shape[0]
    mean = batches.mean(axis=0)
    se = batches.std(axis=0, ddof=1) / math.sqrt(nb)
    return mean, se


class ScalingFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def scaling_fit(points: Sequence) -> ScalingFit:
    """Least-squares fit of log variance against log N."""
    ns = np.asarray([float(n) for n, _ in points])
    vs = np.asarray([float(v) for _, v in points])
    if len(set(ns.tolist())) < 3:
        raise ValueError("need at least 3 distinct sizes")
    if np.any(vs <= 0.0):
        raise ValueError("variances must be positive")
    lx, ly = np.log(ns), np.log(vs)
    slope, intercept = np.polyfit(lx, ly, 1)
    fitted = slope * lx + intercept
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ScalingFit(float(slope), float(intercept), r2)


class LagSign(NamedTuple):
    lag: int
    observed: str  # '+', '-', or '0' (indistinguishable at 3 sigma)
    predicted: str
    consistent: bool


class SignReport(NamedTuple):
    entries: tuple
    all_consistent: bool


def sign_pattern(
    estimates: Sequence, p: ModelParams, conditional: bool = False
) -> SignReport:
    """Classify each lag estimate at 3 sigma and compare with the
    predicted parity (including the -1/N conditional correction when
    conditional is set).  An indistinguishable estimate is consistent
    with either sign."""
    entries = []
    for est in estimates:
        if est.degenerate or est.se == 0.0:
            observed = "+" if est.value > 0 else "-" if est.value < 0 else "0"
        elif est.value > 3.0 * est.se:
            observed = "+"
        elif est.value < -3.0 * est.se:
            observed = "-"
        else:
            observed = "0"
        pred_value = predicted_cov(p, est.lag, conditional=conditional)
        predicted = "+" if pred_value > 0 else "-"
        consistent = observed == "0" or observed == predicted
        entries.append(LagSign(est.lag, observed, predicted, consistent))
    return SignReport(tuple(entries), all(e.consistent for e in entries))


class GaussianZ(NamedTuple):
    lag: int
    estimate: float
    se: float
    truth: float
    z: float


def gaussian_crosscheck(p: ModelParams, lam: float, mcmc) -> list:
    """Compare tilted-ring MCMC covariances at lags 0..5 with the rows of
    the inverse Hessian at the uniform minimum (the Gaussian limit).

    `mcmc` is a sampler RunResult (duck-typed: needs .samples and
    .chain_stats).  Returns one GaussianZ per lag.
    """
    max_lag = min(5, p.n // 2)
    ests = lag_covariances(
        mcmc.samples,
        max_lag,
        circular=True,
        n_chains=max(1, len(mcmc.chain_stats)),
    )
    row = circulant_inverse_row(uniform_hessian(p, lam))
    out = []
    for est in ests:
        truth = float(row[est.lag])
        z = (est.value - truth) / est.se if est.se > 0 else math.inf
        out.append(GaussianZ(est.lag, est.value, est.se, truth, z))
    return out


class NormalityCheck(NamedTuple):
    ks_distance: float
    threshold: float
    passed: bool


def normality_check(sums: Sequence) -> NormalityCheck:
    """Kolmogorov-Smirnov test of standardized sums against the standard
    normal; the threshold 1.36/sqrt(m) + 0.03 allows the finite-sample
    critical distance plus slack for residual autocorrelation."""
    sums = np.asarray(sums, dtype=float)
    m = sums.size
    if m < 1000:
        raise ValueError("need at least 1000 sum samples")
    sd = float(sums.std(ddof=1))
    if sd == 0.0:
        raise ValueError("degenerate sums: zero variance")
    z = (sums - sums.mean()) / sd
    ks = float(sps.kstest(z, "norm").statistic)
    threshold = 1.36 / math.sqrt(m) + 0.03
    return NormalityCheck(ks, threshold, ks < threshold)
