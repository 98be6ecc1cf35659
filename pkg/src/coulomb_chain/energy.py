"""Energy functionals for the 1/r spacing chain.

The state is the vector of positive spacings ``x_1 .. x_n`` between
consecutive particles on a segment or a ring.  Nearest neighbours sit at
distance ``x_k`` and contribute ``beta / x_k``; second neighbours sit at
distance ``x_k + x_{k+1}`` and contribute ``gamma / (x_k + x_{k+1})``.  On
the ring the second-neighbour sum wraps around, which makes the spacings
exchangeable under rotation.  The tilted functionals add ``lam * sum(x)``;
that linear term is what trades the hard ``sum(x) = 1`` constraint for a
free ensemble on the box ``(0, 1]^n``.

All terms are convex on the positive orthant, so every energy here is
strictly convex and the minimization problems downstream are well posed.
Functions accept either a plain array of spacings or a
:class:`SpacingConfig`.
"""

import math
from dataclasses import dataclass

import numpy as np

# Below this value a reciprocal would overflow the double range; the energy
# is reported as +inf so samplers auto-reject instead of raising mid-run.
TINY_SPACING = 1e-300


@dataclass(frozen=True)
class ModelParams:
    """Couplings and system size.

    ``beta`` weights the nearest-neighbour 1/r term; ``gamma`` weights the
    second-neighbour term.  The closed-form covariance results hold for
    0 <= gamma <= beta, so that window is enforced here.  ``n`` is the
    number of spacings; n=3 is the smallest ring with three distinct
    second-neighbour pairs and is allowed for the brute-force toy checks.
    """

    beta: float
    gamma: float
    n: int

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not 0 <= self.gamma <= self.beta:
            raise ValueError(
                f"gamma must lie in [0, beta={self.beta}], got {self.gamma}"
            )
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")


@dataclass
class SpacingConfig:
    """A validated spacing vector.

    ``constrained=True`` marks the fixed-total ensemble: sum(x) == 1 to
    1e-12 (pair-transfer moves keep it there).  Unconstrained vectors live
    on the box (0, 1]^n of the tilted densities.
    """

    x: np.ndarray
    constrained: bool = False

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ValueError("need a 1-d vector of at least 3 spacings")
        if not np.all(x > 0):
            raise ValueError("spacings must be positive")
        if self.constrained:
            total = float(x.sum())
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"constrained spacings must sum to 1, got {total}")
        elif np.any(x > 1.0):
            raise ValueError("unconstrained spacings must lie in (0, 1]")
        self.x = x

    def __len__(self):
        return self.x.size


def _spacings(x, params):
    """Validated spacing array from a SpacingConfig or array-like."""
    v = x.x if isinstance(x, SpacingConfig) else np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size != params.n:
        raise ValueError(f"expected {params.n} spacings, got shape {v.shape}")
    if not np.all(v > 0):
        raise ValueError("spacings must be positive")
    return v


def chain_energy(x, params: ModelParams) -> float:
    """Open-chain energy: sum(beta/x_k) + sum(gamma/(x_{k-1}+x_k))."""
    v = _spacings(x, params)
    if v.min() < TINY_SPACING:
        return math.inf
    e = params.beta * np.sum(1.0 / v)
    if params.gamma > 0:
        e += params.gamma * np.sum(1.0 / (v[:-1] + v[1:]))
    return float(e)


def circular_energy(x, params: ModelParams) -> float:
    """Ring energy: the chain energy plus the wrap term gamma/(x_n + x_1)."""
    v = _spacings(x, params)
    if v.min() < TINY_SPACING:
        return math.inf
    e = chain_energy(v, params)
    if params.gamma > 0:
        e += params.gamma / (v[-1] + v[0])
    return float(e)


def tilted_energy(x, params: ModelParams, lam: float, circular: bool = False) -> float:
    """Chain or ring energy plus the tilt lam * sum(x)."""
    v = _spacings(x, params)
    base = circular_energy(v, params) if circular else chain_energy(v, params)
    return base + lam * float(v.sum())


def gradient(x, params: ModelParams, lam: float = 0.0, circular: bool = False) -> np.ndarray:
    """Gradient of the tilted energy.

    Component k is -beta/x_k^2 - gamma/(x_{k-1}+x_k)^2
    - gamma/(x_k+x_{k+1})^2 + lam, with the second-neighbour terms present
    only where the pair exists (always, on the ring).
    """
    v = _spacings(x, params)
    g = -params.beta / v**2 + lam
    if params.gamma > 0:
        t = params.gamma / (v[:-1] + v[1:]) ** 2
        g[:-1] -= t
        g[1:] -= t
        if circular:
            w = params.gamma / (v[-1] + v[0]) ** 2
            g[0] -= w
            g[-1] -= w
    return g


@dataclass
class BandedHessian:
    """Symmetric tridiagonal matrix with an optional wrap-around corner.

    ``diag`` is the main diagonal (length n), ``off`` the first
    superdiagonal (length n-1), ``corner`` the (0, n-1) = (n-1, 0) entry
    (0.0 for open chains).  Densification is explicit so large-n callers
    keep the O(n) representation.
    """

    diag: np.ndarray
    off: np.ndarray
    corner: float = 0.0

    @property
    def n(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        m[idx, idx + 1] = self.off
        m[idx + 1, idx] = self.off
        if self.corner != 0.0:
            m[0, -1] = m[-1, 0] = self.corner
        return m


def hessian(x, params: ModelParams, lam: float = 0.0, circular: bool = False) -> BandedHessian:
    """Second-derivative matrix of the tilted energy in banded form.

    The tilt is linear, so ``lam`` does not enter; the argument is accepted
    for signature symmetry with :func:`gradient`.  Diagonal entries are
    2*beta/x_k^3 plus 2*gamma/(pair sum)^3 for each second-neighbour pair
    containing k; off-diagonal entries couple adjacent spacings with
    2*gamma/(x_k + x_{k+1})^3.
    """
    del lam
    v = _spacings(x, params)
    diag = 2.0 * params.beta / v**3
    off = np.zeros(v.size - 1)
    corner = 0.0
    if params.gamma > 0:
        pair = 2.0 * params.gamma / (v[:-1] + v[1:]) ** 3
        off = pair.copy()
        diag[:-1] += pair
        diag[1:] += pair
        if circular:
            corner = 2.0 * params.gamma / (v[-1] + v[0]) ** 3
            diag[0] += corner
            diag[-1] += corner
    return BandedHessian(diag=diag, off=off, corner=corner)
