"""Metropolis Monte Carlo for the four spacing ensembles.

Ensembles are the product {chain, ring} x {constrained, tilted}.
Constrained ensembles live on the simplex sum(x) = 1 and are sampled with
adjacent-pair transfers, which preserve the total exactly; tilted
ensembles live on (0, 1]^n and are sampled with single-site moves.  Both
moves touch O(1) energy terms, so acceptance uses an incremental energy
difference, resynchronized against a full recomputation every 10^5 moves.

The compiled loop lives in _kernels; this module owns configuration,
per-chain seeding, and the merge into a RunResult.
"""

from dataclasses import dataclass, field
from typing import Optional

import math

import numpy as np

from . import _kernels, estimate
from .energy import ModelParams
from .theory import a_star

_MASK64 = (1 << 64) - 1


def derive_key(seed: int, chain_id: int) -> int:
    """Per-chain RNG key: splitmix64 output of seed offset by chain rank.

    Chains with the same seed and different ids get streams that share no
    structure; the same (seed, id) pair always maps to the same key.
    """
    if chain_id < 0:
        raise ValueError("chain_id must be nonnegative")
    s = (seed + (chain_id + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class SamplerConfig:
    """Everything needed to reproduce a run bit for bit.

    circular selects ring vs chain; constrained selects the simplex
    ensemble (lam must be 0) vs the tilted box ensemble (lam > 0).
    step_size None means: start from 0.5/n and let burn-in adaptation
    find the right scale.  Adaptation targets acceptance 0.35 +- 0.05 and
    is frozen after burn-in so measurement satisfies detailed balance.
    """

    params: ModelParams
    circular: bool = True
    constrained: bool = True
    lam: float = 0.0
    sweeps: int = 100_000
    burnin_sweeps: int = 1_000
    thin: int = 1
    step_size: Optional[float] = None
    seed: int = 0
    chains: int = 1
    adapt: bool = True

    def __post_init__(self):
        if self.sweeps <= 0:
            raise ValueError("sweeps must be positive")
        if self.burnin_sweeps < 0:
            raise ValueError("burnin_sweeps must be nonnegative")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if self.step_size is not None and not self.step_size > 0.0:
            raise ValueError("step_size must be positive")
        if self.constrained:
            if self.lam != 0.0:
                raise ValueError("constrained ensembles take no tilt")
        elif not self.lam > 0.0:
            raise ValueError("tilted ensembles need lam > 0")

    @property
    def samples_per_chain(self) -> int:
        return (self.sweeps + self.thin - 1) // self.thin


@dataclass(frozen=True)
class ChainStats:
    chain_id: int
    key: int
    acceptance_rate: float
    burnin_acceptance_rate: float
    final_step: float
    max_energy_drift: float
    max_sum_err: float
    rescales: int


@dataclass(frozen=True)
class RunResult:
    """Merged output of all chains of one sampling job."""

    config: SamplerConfig
    samples: np.ndarray  # (total recorded states, n), chain-ordered
    mean_spacing: np.ndarray
    mean_spacing_se: np.ndarray
    lag_cov: tuple  # CovEstimate per lag 0..max_lag
    acceptance_rate: float
    ess_estimate: float
    chain_stats: tuple
    flags: tuple = field(default_factory=tuple)

    @property
    def max_sum_err(self) -> float:
        return max(c.max_sum_err for c in self.chain_stats)

    @property
    def max_energy_drift(self) -> float:
        return max(c.max_energy_drift for c in self.chain_stats)


def initial_state(config: SamplerConfig) -> np.ndarray:
    """Deterministic start: uniform spacings (forced onto the simplex for
    constrained runs; clipped into (0, 1] at the tilted minimum scale)."""
    p = config.params
    if config.constrained:
        x = np.full(p.n, 1.0 / p.n)
        x[-1] = 1.0 - float(np.sum(x[:-1]))
        return x
    a = a_star(p, config.lam)
    return np.full(p.n, min(max(a, 1e-6), 1.0))


def default_step(config: SamplerConfig) -> float:
    if config.step_size is not None:
        return config.step_size
    return 0.5 / config.params.n


def propose_pair_transfer(state, i: int, u: float, circular: bool = False):
    """Candidate with x_i -> x_i + u and its successor reduced to match.

    The successor is cyclic on the ring; on the chain i must address one
    of the n-1 adjacent pairs.  The pair total is preserved (to the last
    unit of precision of the pair sum), so the simplex constraint never
    drifts faster than rounding noise.  Nonpositive entries are allowed
    in the candidate: the acceptance step rejects them via infinite
    energy.
    """
    x = np.array(state, dtype=float)
    n = x.shape[0]
    if circular:
        j = (i + 1) % n
    else:
        if not 0 <= i < n - 1:
            raise IndexError("chain pair index must satisfy 0 <= i < n-1")
        j = i + 1
    xi, xj = x[i], x[j]
    x[i] = xi + u
    x[j] = (xi + xj) - x[i]
    return x


def propose_site(state, i: int, u: float):
    """Candidate with x_i -> x_i + u (tilted ensembles; domain (0, 1] is
    enforced by the acceptance step, not here)."""
    x = np.array(state, dtype=float)
    x[i] = x[i] + u
    return x


def pair_transfer_delta(
    state, i: int, u: float, p: ModelParams, circular: bool = False
) -> float:
    """Incremental energy change of a pair transfer.

    Mirrors the compiled kernel term for term: two inverse-spacing terms
    and the two pair terms flanking the moved pair; the moved pair's own
    sum is unchanged and the tilt term cancels.  Returns +inf for
    candidates leaving the domain.
    """
    x = np.asarray(state, dtype=float)
    n = x.shape[0]
    j = (i + 1) % n if circular else i + 1
    xi, xj = x[i], x[j]
    xin = xi + u
    xjn = (xi + xj) - xin
    if not (xin > _kernels.TINY and xjn > _kernels.TINY):
        return math.inf
    beta, gamma = p.beta, p.gamma
    dh = beta * (1.0 / xin - 1.0 / xi) + beta * (1.0 / xjn - 1.0 / xj)
    if circular:
        il = i - 1 if i > 0 else n - 1
        jr = j + 1 if j < n - 1 else 0
        dh += gamma * (1.0 / (x[il] + xin) - 1.0 / (x[il] + xi))
        dh += gamma * (1.0 / (xjn + x[jr]) - 1.0 / (xj + x[jr]))
    else:
        if i > 0:
            dh += gamma * (1.0 / (x[i - 1] + xin) - 1.0 / (x[i - 1] + xi))
        if j < n - 1:
            dh += gamma * (1.0 / (xjn + x[j + 1]) - 1.0 / (xj + x[j + 1]))
    return dh


def site_move_delta(
    state, i: int, u: float, p: ModelParams, lam: float, circular: bool = False
) -> float:
    """Incremental energy change of a single-site move on (0, 1]^n."""
    x = np.asarray(state, dtype=float)
    n = x.shape[0]
    xi = x[i]
    xin = xi + u
    if not (xin > _kernels.TINY and xin <= 1.0):
        return math.inf
    beta, gamma = p.beta, p.gamma
    dh = beta * (1.0 / xin - 1.0 / xi) + lam * (xin - xi)
    if circular:
        il = i - 1 if i > 0 else n - 1
        ir = i + 1 if i < n - 1 else 0
        dh += gamma * (1.0 / (x[il] + xin) - 1.0 / (x[il] + xi))
        dh += gamma * (1.0 / (xin + x[ir]) - 1.0 / (xi + x[ir]))
    else:
        if i > 0:
            dh += gamma * (1.0 / (x[i - 1] + xin) - 1.0 / (x[i - 1] + xi))
        if i < n - 1:
            dh += gamma * (1.0 / (xin + x[i + 1]) - 1.0 / (xi + x[i + 1]))
    return dh


def metropolis_accept(delta_h: float, rng) -> bool:
    """Accept with probability min(1, exp(-delta_h)); +inf never accepts.

    Always consumes exactly one draw from rng, matching the kernel's
    fixed draw schedule.
    """
    u = rng.random()
    if delta_h == math.inf:
        return False
    if delta_h <= 0.0:
        return True
    return u < math.exp(-delta_h)


def run(config: SamplerConfig, max_lag: Optional[int] = None) -> RunResult:
    """Run all chains sequentially and merge, ordered by chain id.

    Identical configs produce bit-identical results.  max_lag defaults to
    min(8, n // 2) lags in the covariance summary.
    """
    p = config.params
    if max_lag is None:
        max_lag = min(8, p.n // 2)
    if not 0 <= max_lag <= p.n // 2:
        raise ValueError("max_lag must lie in [0, n/2]")

    per_chain = config.samples_per_chain
    blocks = []
    stats = []
    acc_total = 0
    prop_total = 0
    for cid in range(config.chains):
        x = initial_state(config)
        block = np.empty((per_chain, p.n))
        key = derive_key(config.seed, cid)
        acc_b, prop_b, acc_m, prop_m, step, drift, sum_err, rescales = (
            _kernels.run_mcmc(
                x,
                p.beta,
                p.gamma,
                config.lam,
                config.circular,
                config.constrained,
                config.burnin_sweeps,
                config.sweeps,
                config.thin,
                default_step(config),
                config.adapt,
                np.uint64(key),
                block,
            )
        )
        blocks.append(block)
        acc_total += acc_m
        prop_total += prop_m
        stats.append(
            ChainStats(
                chain_id=cid,
                key=key,
                acceptance_rate=acc_m / prop_m,
                burnin_acceptance_rate=acc_b / prop_b if prop_b else 0.0,
                final_step=step,
                max_energy_drift=drift,
                max_sum_err=sum_err,
                rescales=rescales,
            )
        )

    samples = np.concatenate(blocks, axis=0)
    mean, mean_se = estimate.mean_with_se(samples, n_chains=config.chains)
    lag_cov = tuple(
        estimate.lag_covariances(
            samples, max_lag, circular=config.circular, n_chains=config.chains
        )
    )

    flags = []
    for c in stats:
        if not 0.05 <= c.acceptance_rate <= 0.95:
            flags.append(
                f"chain {c.chain_id}: acceptance {c.acceptance_rate:.3f} "
                "outside [0.05, 0.95]"
            )
        if c.max_energy_drift > 1e-8:
            flags.append(
                f"chain {c.chain_id}: energy drift {c.max_energy_drift:.2e}"
            )
        if config.constrained and c.max_sum_err > 1e-12:
            flags.append(
                f"chain {c.chain_id}: sum error {c.max_sum_err:.2e}"
            )

    return RunResult(
        config=config,
        samples=samples,
        mean_spacing=mean,
        mean_spacing_se=mean_se,
        lag_cov=lag_cov,
        acceptance_rate=acc_total / prop_total,
        ess_estimate=lag_cov[0].n_eff,
        chain_stats=tuple(stats),
        flags=tuple(flags),
    )
