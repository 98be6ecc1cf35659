"""What fixing the total length does to the correlations.

Conditioning the ring on sum(x) = 1 subtracts the same constant,
(1/N)(1-delta)/(1+delta), from the covariance bracket at every lag.  Two
regimes follow:

  * large N (here 512): the correction is a small shift of the lag-1
    correlation away from -delta -- measurable but gentle;
  * small N (here 16): the correction overwhelms delta^2 and flips the
    lag-2 correlation negative, breaking the alternation pattern.

The script samples both and compares against the conditional prediction.
It finishes with the N=3 toy ensemble, where the sampler can be checked
against direct quadrature of the Gibbs weight -- no asymptotics at all.

Run:  python3 demos/04_constraint_correction.py     (about 20 s)
"""

import numpy as np
from scipy import stats

from coulomb_chain.energy import ModelParams
from coulomb_chain.estimate import correlation_estimates, sign_pattern
from coulomb_chain.sampler import SamplerConfig, run
from coulomb_chain.theory import delta, predicted_cov
from coulomb_chain.verification import toy_reference_probs, TOY_BINS

print("=" * 72)
print("Large N: a gentle shift of the lag-1 correlation")
print("=" * 72)
p = ModelParams(1.0, 1.0, 512)
d = delta(p)
result = run(SamplerConfig(params=p, sweeps=50_000, burnin_sweeps=3_000,
                           thin=10, seed=31, chains=4))
corr = correlation_estimates(result.samples, 2, circular=True, n_chains=4)
target = -d - (1 / p.n) * (1 - d) / (1 + d)
print(f"N={p.n}: lag-1 correlation {corr[1].value:+.6f} +- {corr[1].se:.6f}")
print(f"free law -delta          {-d:+.6f}")
print(f"with -1/N correction     {target:+.6f}   "
      f"(z against corrected: {(corr[1].value - target) / corr[1].se:+.2f})")

print()
print("=" * 72)
print("Small N: the correction flips the lag-2 sign")
print("=" * 72)
p16 = ModelParams(1.0, 1.0, 16)
r16 = run(SamplerConfig(params=p16, sweeps=100_000, burnin_sweeps=2_000, seed=32))
corr16 = correlation_estimates(r16.samples, 2, circular=True)
pred_free = d * d
pred_cond = predicted_cov(p16, 2, conditional=True) / predicted_cov(p16, 0, conditional=True)
print(f"N=16 lag-2 correlation  {corr16[2].value:+.6f} +- {corr16[2].se:.6f}")
print(f"free law +delta^2       {pred_free:+.6f}   (wrong sign!)")
print(f"conditional prediction  {pred_cond:+.6f}   "
      f"(z: {(corr16[2].value - pred_cond) / corr16[2].se:+.2f})")
report = sign_pattern(
    correlation_estimates(r16.samples, 4, circular=True)[1:], p16, conditional=True
)
print()
print("sign pattern at 3 sigma (observed vs conditional prediction):")
for entry in report.entries:
    print(f"  lag {entry.lag}: observed {entry.observed!r}, predicted "
          f"{entry.predicted!r}, consistent={entry.consistent}")

print()
print("=" * 72)
print("N=3: sampler vs direct quadrature of the Gibbs weight")
print("=" * 72)
p3 = ModelParams(1.0, 1.0, 3)
probs = toy_reference_probs(p3).reshape(TOY_BINS, TOY_BINS)
r3 = run(SamplerConfig(params=p3, sweeps=400_000, burnin_sweeps=5_000, thin=15, seed=33))
m = r3.samples.shape[0]
ix = np.clip((r3.samples[:, 0] * TOY_BINS).astype(int), 0, TOY_BINS - 1)
iy = np.clip((r3.samples[:, 1] * TOY_BINS).astype(int), 0, TOY_BINS - 1)
counts = np.bincount(ix * TOY_BINS + iy, minlength=TOY_BINS**2).reshape(probs.shape)

print(f"{m} thinned draws; (x1, x2) marginal on a {TOY_BINS}x{TOY_BINS} simplex grid")
print()
print("expected (quadrature) vs observed counts, central band x2 in (0.30, 0.35]:")
j = 6
print(f"{'x1 bin':>12} {'expected':>10} {'observed':>10}")
for i in range(3, 11):
    lo, hi = i / TOY_BINS, (i + 1) / TOY_BINS
    print(f"({lo:.2f},{hi:.2f}] {probs[i, j] * m:10.1f} {counts[i, j]:10d}")

expected = probs.ravel() * m
big = expected >= 5.0
obs = np.append(counts.ravel()[big], counts.ravel()[~big].sum())
exp = np.append(expected[big], expected[~big].sum())
chi2, pval = stats.chisquare(obs, exp)
print()
print(f"chi-square over {big.sum()} cells (+ pooled tail): {chi2:.1f}, p = {pval:.3f}")
print("The Metropolis pair-transfer dynamics reproduces the exact joint")
print("density, not just its moments.")
