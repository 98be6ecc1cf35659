"""Closed-form predictions for spacing statistics of the 1/r chain.

The covariance of two spacings on the ring decays geometrically in their
(cyclic) lag with alternating sign.  The decay base

    delta = gamma / (4 beta + gamma + 2 sqrt(4 beta^2 + 2 beta gamma))

comes out of the asymptotic inverse of the tridiagonal-circulant Hessian at
the uniform minimum; the same number reappears as ``eta``, the contraction
rate of the open chain's boundary layer, and as the ratio ``b/x1`` of the
circulant module under the physical parametrization.  To leading order in
1/N the constrained-ring covariance at lag l is

    N^-3 / (2 beta + gamma (1-delta)/2) * [ (-delta)^l - (1/N)(1-delta)/(1+delta) ]

where the -1/N term is what conditioning on sum(x)=1 subtracts; without the
constraint (tilted ensemble) only the (-delta)^l part survives.  At small N
the correction dominates delta^l for l >= 2, so sign tests must pick the
ensemble and N with care; :func:`predicted_cov` exposes both variants.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from coulomb_chain.circulant import SymTriCirculant
from coulomb_chain.energy import ModelParams


def delta(p: ModelParams) -> float:
    """Geometric decay base of inter-spacing correlations, in [0, 1)."""
    if p.gamma == 0.0:
        return 0.0
    return p.gamma / (
        4.0 * p.beta + p.gamma + 2.0 * math.sqrt(4.0 * p.beta**2 + 2.0 * p.beta * p.gamma)
    )


def eta(p: ModelParams) -> float:
    """Boundary-layer decay base of the open-chain minimizer.

    Algebraically identical to :func:`delta`; kept as a separate entry
    point because it is defined through the minimizer dynamics (ratio of
    the stable eigenvalue of the interior recursion) rather than through
    the Hessian inverse.  gamma=0 is the decoupled limit: the minimizer is
    exactly constant, so the decay is immediate and eta is defined as 0.
    """
    if p.gamma == 0.0:
        return 0.0
    r = p.beta / p.gamma
    return 1.0 + 4.0 * r - math.sqrt(16.0 * r * r + 8.0 * r)


def a_star(p: ModelParams, lam: float) -> float:
    """Uniform minimizing spacing a = sqrt((2 beta + gamma) / (2 lam))."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    return math.sqrt((2.0 * p.beta + p.gamma) / (2.0 * lam))


def lambda_unbiased(p: ModelParams) -> float:
    """Tilt strength at which n * a_star = 1, i.e. (2 beta + gamma) n^2 / 2.

    This is the leading-order calibration: the tilted mean spacing equals
    1/n so sums of spacings are unbiased for the unit total length.
    """
    return 0.5 * (2.0 * p.beta + p.gamma) * p.n * p.n


@dataclass(frozen=True)
class CovPrediction:
    """Bundle of the closed-form covariance ingredients.

    variance_amplitude is the coefficient of N^-3 at lag 0 (unconditional);
    conditional_correction is the (1/N)(1-delta)/(1+delta) term that the
    sum constraint subtracts inside the bracket at every lag.
    """

    variance_amplitude: float
    delta: float
    conditional_correction: float
    n: int

    def __post_init__(self):
        if not 0 <= self.delta < 1:
            raise ValueError(f"delta out of range: {self.delta}")
        if self.variance_amplitude <= 0:
            raise ValueError("variance_amplitude must be positive")


def cov_prediction(p: ModelParams) -> CovPrediction:
    d = delta(p)
    amp = 1.0 / (2.0 * p.beta + p.gamma * (1.0 - d) / 2.0)
    corr = (1.0 / p.n) * (1.0 - d) / (1.0 + d)
    return CovPrediction(variance_amplitude=amp, delta=d, conditional_correction=corr, n=p.n)


def predicted_cov(p: ModelParams, lag: int, conditional: bool = False) -> float:
    """Leading-order spacing covariance at the given cyclic lag.

    Unconditional: N^-3 * amplitude * (-delta)^lag (tilted ensembles).
    Conditional (sum fixed to 1): subtract (1/N)(1-delta)/(1+delta) inside
    the bracket.  Lags are cyclic distances, so 0 <= lag <= N/2.
    """
    if not 0 <= lag <= p.n / 2:
        raise ValueError(f"lag must lie in [0, n/2]=[0, {p.n / 2}], got {lag}")
    cp = cov_prediction(p)
    bracket = (-cp.delta) ** lag
    if conditional:
        bracket -= cp.conditional_correction
    return p.n**-3.0 * cp.variance_amplitude * bracket


def predicted_var_of_sum(p: ModelParams, lam: float) -> float:
    """Variance of the total length in the tilted ensemble at tilt lam.

    a^3 * N * amplitude * (1-delta)/(1+delta) with a = a_star(lam); the
    (1-delta)/(1+delta) factor sums the alternating covariance series over
    all lags.
    """
    a = a_star(p, lam)
    cp = cov_prediction(p)
    return a**3 * p.n * cp.variance_amplitude * (1.0 - cp.delta) / (1.0 + cp.delta)


class EdgeFactor(NamedTuple):
    envelope: float
    informative: bool


def chain_edge_factor(p: ModelParams, j: int, k: int, alpha: float = None) -> EdgeFactor:
    """Envelope bound for chain-vs-ring covariance comparisons.

    Open-chain covariances agree with ring covariances up to a relative
    correction of order exp(-alpha * min(j, N-k)) for sites 1 <= j <= k <= N.
    alpha is not pinned down theoretically, so by default it is taken from
    the boundary decay base (-log eta); callers may pass a fitted value.
    The bound says nothing useful within a spacing or two of an edge, so
    those cases are flagged uninformative.
    """
    if not 1 <= j <= k <= p.n:
        raise ValueError(f"need 1 <= j <= k <= n, got j={j}, k={k}, n={p.n}")
    if alpha is None:
        e = eta(p)
        alpha = math.inf if e == 0.0 else -math.log(e)
    dist = min(j, p.n - k)
    envelope = 1.0 if dist == 0 else math.exp(-alpha * dist)
    return EdgeFactor(envelope=envelope, informative=dist >= 2)


def uniform_hessian(p: ModelParams, lam: float) -> SymTriCirculant:
    """Ring-energy Hessian at its uniform minimum, as a SymTriCirculant.

    With a = a_star(lam): diagonal c = (2 beta + gamma/2)/a^3 and band
    b = gamma/(4 a^3).  This is the bridge between the model parameters and
    the circulant algebra; its inverse row is the Gaussian-approximation
    covariance of the tilted ring.
    """
    a = a_star(p, lam)
    c = (2.0 * p.beta + p.gamma / 2.0) / a**3
    b = p.gamma / (4.0 * a**3)
    return SymTriCirculant(c=c, b=b, n=p.n)
