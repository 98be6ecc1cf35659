"""Measured spacing correlations vs the closed-form alternating law.

A tilted ring at the calibrated multiplier is the cleanest place to see the
covariance structure: spacings are exchangeable, there is no boundary, and
no global constraint.  The lag-k correlation should be (-delta)^k -- about
-0.101 at lag 1 and +0.0102 at lag 2 for beta = gamma = 1.

The script runs three replica chains of Metropolis dynamics, prints the
estimated correlations with batch-means standard errors next to the
prediction, and closes with the Gaussian cross-check: measured covariances
against the rows of the inverse Hessian at the uniform minimum.

Run:  python3 demos/03_sampling_correlations.py     (about 15 s)
"""

from coulomb_chain.energy import ModelParams
from coulomb_chain.estimate import correlation_estimates, gaussian_crosscheck
from coulomb_chain.sampler import SamplerConfig, run
from coulomb_chain.theory import delta, lambda_unbiased

p = ModelParams(1.0, 1.0, 64)
lam = lambda_unbiased(p)
config = SamplerConfig(
    params=p,
    constrained=False,
    lam=lam,
    sweeps=120_000,
    burnin_sweeps=2_000,
    seed=20260814,
    chains=3,
)
print("=" * 72)
print(f"Tilted ring, beta=gamma=1, N={p.n}, tilt={lam:.0f}, 3 x {config.sweeps} sweeps")
print("=" * 72)
result = run(config)
print(f"acceptance rate {result.acceptance_rate:.3f}; "
      f"effective sample size {result.ess_estimate:.0f}")
print(f"mean spacing {result.mean_spacing.mean():.8f} (1/N = {1 / p.n:.8f})")

d = delta(p)
corr = correlation_estimates(result.samples, 6, circular=True, n_chains=config.chains)
print()
print(f"{'lag':>4} {'measured':>12} {'se':>10} {'predicted':>12} {'rel diff':>9}")
for est in corr[1:]:
    pred = (-d) ** est.lag
    rel = f"{est.value / pred - 1:+9.1%}" if abs(pred) > 3 * est.se else "   (noise)"
    print(f"{est.lag:4d} {est.value:12.6f} {est.se:10.6f} {pred:12.6f} {rel}")
print()
print("Sign alternation with geometric amplitude decay.  The prediction is")
print("the N -> infinity limit; this run is long enough to resolve the small")
print("finite-N offset (a couple of percent at lag 1), and by lag 4 the")
print("signal is beneath the noise floor, exactly as the law predicts.")

print()
print("=" * 72)
print("Gaussian cross-check: covariances vs inverse-Hessian rows")
print("=" * 72)
print(f"{'lag':>4} {'measured':>14} {'hessian row':>14} {'z':>7}")
for g in gaussian_crosscheck(p, lam, result):
    print(f"{g.lag:4d} {g.estimate:14.4e} {g.truth:14.4e} {g.z:7.2f}")
print()
print("At this N and run length the quadratic (Gaussian) picture describes")
print("every lag to within a few percent; the small systematic excess at")
print("lag 0 is the leading anharmonic correction, visible only because the")
print("run is long.")
