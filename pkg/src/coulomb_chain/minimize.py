"""Deterministic minimizers for the tilted spacing energies.

The ring minimum is uniform and available in closed form.  The open chain
loses translation symmetry at its two ends, so its minimum is found by a
damped Newton iteration on the stationarity system; the resulting profile
is flat in the bulk and relaxes geometrically toward the edges.
`boundary_decay_fit` measures that relaxation rate, and `calibrate_lambda`
inverts the map lambda -> sum of spacings by bisection.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import math

import numpy as np
from scipy.linalg import solveh_banded

from .energy import ModelParams, gradient, hessian
from .theory import a_star, lambda_unbiased

MAX_NEWTON_ITER = 200
# converged when the sup-norm of the gradient drops below this times lambda
RESIDUAL_RTOL = 1e-12


class NewtonError(RuntimeError):
    """Newton iteration failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class MinProfile:
    """A converged minimizer of a tilted energy.

    a_vec holds the n optimal spacings, lam the tilt they were computed at,
    residual_norm the sup-norm of the gradient at a_vec, and iterations the
    number of Newton steps taken (0 for closed-form solutions).
    """

    a_vec: np.ndarray
    lam: float
    residual_norm: float
    iterations: int

    def __post_init__(self):
        a = np.asarray(self.a_vec, dtype=float)
        object.__setattr__(self, "a_vec", a)
        if a.ndim != 1 or not np.all(a > 0.0):
            raise ValueError("profile entries must be positive")
        if self.residual_norm > RESIDUAL_RTOL * self.lam:
            raise ValueError(
                f"unconverged profile: residual {self.residual_norm:.3e} "
                f"exceeds {RESIDUAL_RTOL:.0e} * lambda"
            )
        if np.max(np.abs(a - a[::-1])) > 1e-10:
            raise ValueError("profile is not symmetric under reversal")


def minimize_circular(p: ModelParams, lam: float) -> MinProfile:
    """Exact minimizer of the tilted ring energy: a uniform profile.

    Every site sees the same environment on the ring, so the stationarity
    system collapses to a single scalar equation solved by a_star.  The
    entries depend on lam but not on n.
    """
    if lam <= 0.0:
        raise ValueError("tilt must be positive")
    a = np.full(p.n, a_star(p, lam))
    res = float(np.max(np.abs(gradient(a, p, lam, circular=True))))
    return MinProfile(a_vec=a, lam=lam, residual_norm=res, iterations=0)


def _newton_step(x: np.ndarray, p: ModelParams, lam: float) -> np.ndarray:
    """Solve H(x) s = -g(x) using the tridiagonal banded Cholesky path."""
    h = hessian(x, p, lam)
    ab = np.zeros((2, p.n))
    ab[0, 1:] = h.off
    ab[1, :] = h.diag
    return solveh_banded(ab, -gradient(x, p, lam))


def minimize_chain(
    p: ModelParams, lam: float, residual_log: Optional[list] = None
) -> MinProfile:
    """Minimize the tilted open-chain energy by damped Newton iteration.

    Starts from the uniform ring profile and solves the full stationarity
    system; the energy is strictly convex on the positive orthant, and the
    damping keeps every iterate safely inside it.  Raises NewtonError if
    the residual has not dropped below 1e-12 * lam after 200 steps.
    """
    if lam <= 0.0:
        raise ValueError("tilt must be positive")
    if p.n < 4:
        raise ValueError("open-chain minimization needs at least 4 spacings")

    x = np.full(p.n, a_star(p, lam))
    tol = RESIDUAL_RTOL * lam
    res = float(np.max(np.abs(gradient(x, p, lam))))
    for it in range(MAX_NEWTON_ITER):
        if residual_log is not None:
            residual_log.append(res)
        if res <= tol:
            return MinProfile(a_vec=x, lam=lam, residual_norm=res, iterations=it)
        step = _newton_step(x, p, lam)
        # halve the step until no component dips below a tenth of the
        # current smallest spacing; full steps can overshoot into x <= 0
        floor = 0.1 * float(np.min(x))
        t = 1.0
        while np.min(x + t * step) < floor:
            t *= 0.5
            if t < 1e-12:
                raise NewtonError("damping underflow", residual=res)
        x = x + t * step
        res = float(np.max(np.abs(gradient(x, p, lam))))
    if residual_log is not None:
        residual_log.append(res)
    if res <= tol:
        return MinProfile(
            a_vec=x, lam=lam, residual_norm=res, iterations=MAX_NEWTON_ITER
        )
    raise NewtonError(
        f"no convergence after {MAX_NEWTON_ITER} Newton steps", residual=res
    )


class DecayFit(NamedTuple):
    """Least-squares fit of the geometric edge relaxation of a profile."""

    rate: float
    r2: float
    n_points: int
    immediate: bool


def boundary_decay_fit(profile: MinProfile, p: ModelParams) -> DecayFit:
    """Fit log|a_k - a| against k over the resolvable edge window.

    The window starts at k=3 (the first two sites carry the strongest
    boundary distortion and are excluded) and extends while the deviation
    from the bulk value stays above 1e-13 relative.  With fewer than four
    usable points the fit is meaningless: if the tail beyond k=3 is already
    below 1e-10 relative the profile is flagged as immediate decay (rate
    and r2 are reported as 0), otherwise an error is raised.
    """
    if p.gamma == 0.0:
        raise ValueError("decay fit needs a pair coupling: gamma > 0")
    a = a_star(p, profile.lam)
    dev = np.abs(profile.a_vec - a)
    half = len(dev) // 2

    ks = []
    for k in range(3, half + 1):
        if dev[k - 1] <= 1e-13 * a:
            break
        ks.append(k)

    if len(ks) < 4:
        if half >= 4 and np.max(dev[3:half]) <= 1e-10 * a:
            return DecayFit(rate=0.0, r2=0.0, n_points=len(ks), immediate=True)
        raise ValueError(
            f"only {len(ks)} usable points in the decay window; need 4"
        )

    ks = np.asarray(ks, dtype=float)
    logdev = np.log(dev[ks.astype(int) - 1])
    slope, intercept = np.polyfit(ks, logdev, 1)
    fitted = slope * ks + intercept
    ss_res = float(np.sum((logdev - fitted) ** 2))
    ss_tot = float(np.sum((logdev - logdev.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        rate=math.exp(slope), r2=r2, n_points=len(ks), immediate=False
    )


def calibrate_lambda(p: ModelParams, circular: bool = False) -> float:
    """Find the tilt at which the minimizer's spacings sum to exactly 1.

    The ring case inverts N * a_star(lambda) = 1 in closed form, as does
    gamma = 0 (where chain and ring coincide).  The open chain is solved by
    bisection: the total length is strictly decreasing in the tilt, and the
    root always lies within a factor of 4 of the ring value.
    """
    lam0 = lambda_unbiased(p)
    if circular or p.gamma == 0.0:
        return lam0

    def excess(lam: float) -> float:
        return float(minimize_chain(p, lam).a_vec.sum()) - 1.0

    lo, hi = 0.25 * lam0, 4.0 * lam0
    if not (excess(lo) > 0.0 > excess(hi)):
        raise ValueError("calibration bracket does not straddle the root")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = excess(mid)
        if abs(f) <= 1e-10:
            return mid
        if f > 0.0:
            lo = mid
        else:
            hi = mid
    raise NewtonError("bisection failed to reach tolerance", residual=abs(f))
