"""Compiled Metropolis kernel and its counter-based RNG.

The random stream is splitmix64: a 64-bit counter advanced by a fixed odd
increment, whipped through two multiply-xorshift rounds per draw.  Distinct
chains get independent streams by seeding the counter with a per-chain key
(see sampler.derive_key).  Every elementary move consumes exactly three
draws (site, displacement, acceptance), whether or not the proposal is
valid, so trajectories can be replayed move-for-move by a plain-Python
mirror in the tests.

All state updates happen in this one function to keep the hot loop free of
Python-object traffic; the sampler module owns configuration, chain
orchestration, and statistics.
"""

import math

import numpy as np
from numba import njit

U64 = np.uint64
SM64_GAMMA = U64(0x9E3779B97F4A7C15)
SM64_MIX1 = U64(0xBF58476D1CE4E5B9)
SM64_MIX2 = U64(0x94D049BB133111EB)
_S30 = U64(30)
_S27 = U64(27)
_S31 = U64(31)
_S11 = U64(11)
TO_UNIT = 1.1102230246251565e-16  # 2**-53: maps the top 53 bits onto [0, 1)
TINY = 1e-300

RESYNC_INTERVAL = 100_000
ADAPT_BATCH = 100
STEP_MIN = 1e-12
STEP_MAX = 10.0
SUM_RESCUE = 1e-13


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * SM64_MIX1
    z = (z ^ (z >> _S27)) * SM64_MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def total_energy(x, beta, gamma, lam, circular):
    n = x.shape[0]
    e = 0.0
    for k in range(n):
        e += beta / x[k]
    for k in range(n - 1):
        e += gamma / (x[k] + x[k + 1])
    if circular:
        e += gamma / (x[n - 1] + x[0])
    if lam != 0.0:
        s = 0.0
        for k in range(n):
            s += x[k]
        e += lam * s
    return e


@njit(cache=True)
def run_mcmc(
    x,
    beta,
    gamma,
    lam,
    circular,
    constrained,
    burnin,
    sweeps,
    thin,
    step0,
    adapt,
    key,
    samples,
):
    """Run one chain in place; fill `samples` with thinned post-burn states.

    Returns (accepted_burn, proposed_burn, accepted_meas, proposed_meas,
    final_step, max_energy_drift, max_sum_err, rescales).
    """
    n = x.shape[0]
    # the constrained chain has n-1 adjacent pairs; everything else has n sites
    nsite = n - 1 if (constrained and not circular) else n
    state = key
    s = step0
    h = total_energy(x, beta, gamma, lam, circular)

    acc_b = 0
    prop_b = 0
    acc_m = 0
    prop_m = 0
    batch_acc = 0
    batch_prop = 0
    moves = 0
    max_drift = 0.0
    max_sum_err = 0.0
    rescales = 0

    total_sweeps = burnin + sweeps
    for sweep in range(total_sweeps):
        burning = sweep < burnin
        for _ in range(n):
            state = state + SM64_GAMMA
            u1 = (_mix(state) >> _S11) * TO_UNIT
            state = state + SM64_GAMMA
            u2 = (_mix(state) >> _S11) * TO_UNIT
            state = state + SM64_GAMMA
            u3 = (_mix(state) >> _S11) * TO_UNIT

            i = int(u1 * nsite)
            if i >= nsite:
                i = nsite - 1
            u = (2.0 * u2 - 1.0) * s

            dh = 0.0
            if constrained:
                j = i + 1
                if j == n:
                    j = 0
                xi = x[i]
                xj = x[j]
                xin = xi + u
                xjn = (xi + xj) - xin
                ok = (xin > TINY) and (xjn > TINY)
                if ok:
                    dh = beta * (1.0 / xin - 1.0 / xi) + beta * (
                        1.0 / xjn - 1.0 / xj
                    )
                    if circular:
                        il = i - 1 if i > 0 else n - 1
                        jr = j + 1 if j < n - 1 else 0
                        dh += gamma * (
                            1.0 / (x[il] + xin) - 1.0 / (x[il] + xi)
                        )
                        dh += gamma * (
                            1.0 / (xjn + x[jr]) - 1.0 / (xj + x[jr])
                        )
                    else:
                        if i > 0:
                            dh += gamma * (
                                1.0 / (x[i - 1] + xin) - 1.0 / (x[i - 1] + xi)
                            )
                        if j < n - 1:
                            dh += gamma * (
                                1.0 / (xjn + x[j + 1]) - 1.0 / (xj + x[j + 1])
                            )
            else:
                xi = x[i]
                xin = xi + u
                ok = (xin > TINY) and (xin <= 1.0)
                if ok:
                    dh = beta * (1.0 / xin - 1.0 / xi) + lam * (xin - xi)
                    if circular:
                        il = i - 1 if i > 0 else n - 1
                        ir = i + 1 if i < n - 1 else 0
                        dh += gamma * (
                            1.0 / (x[il] + xin) - 1.0 / (x[il] + xi)
                        )
                        dh += gamma * (
                            1.0 / (xin + x[ir]) - 1.0 / (xi + x[ir])
                        )
                    else:
                        if i > 0:
                            dh += gamma * (
                                1.0 / (x[i - 1] + xin) - 1.0 / (x[i - 1] + xi)
                            )
                        if i < n - 1:
                            dh += gamma * (
                                1.0 / (xin + x[i + 1]) - 1.0 / (xi + x[i + 1])
                            )

            accept = ok and ((dh <= 0.0) or (u3 < math.exp(-dh)))
            if accept:
                x[i] = xin
                if constrained:
                    x[j] = xjn
                h += dh

            if burning:
                prop_b += 1
                if accept:
                    acc_b += 1
                if adapt:
                    batch_prop += 1
                    if accept:
                        batch_acc += 1
                    if batch_prop == ADAPT_BATCH:
                        rate = batch_acc / ADAPT_BATCH
                        if rate > 0.40:
                            s = s * 1.1
                            if s > STEP_MAX:
                                s = STEP_MAX
                        elif rate < 0.30:
                            s = s / 1.1
                            if s < STEP_MIN:
                                s = STEP_MIN
                        batch_prop = 0
                        batch_acc = 0
            else:
                prop_m += 1
                if accept:
                    acc_m += 1

            moves += 1
            if moves % RESYNC_INTERVAL == 0:
                hf = total_energy(x, beta, gamma, lam, circular)
                drift = abs(h - hf) / max(1.0, abs(hf))
                if drift > max_drift:
                    max_drift = drift
                h = hf

        if constrained:
            # compensated recompute: transfers preserve the pair totals up
            # to one rounding each, so the true sum random-walks at the
            # 1e-17 scale; rescale on the rare sweep it exceeds 1e-13
            ssum = 0.0
            comp = 0.0
            for k in range(n):
                yk = x[k] - comp
                tk = ssum + yk
                comp = (tk - ssum) - yk
                ssum = tk
            err = abs(ssum - 1.0)
            if err > max_sum_err:
                max_sum_err = err
            if err > SUM_RESCUE:
                for k in range(n):
                    x[k] = x[k] / ssum
                h = total_energy(x, beta, gamma, lam, circular)
                rescales += 1

        if sweep >= burnin:
            rec = sweep - burnin
            if rec % thin == 0:
                samples[rec // thin, :] = x

    return acc_b, prop_b, acc_m, prop_m, s, max_drift, max_sum_err, rescales
