"""Closed-form algebra for symmetric tridiagonal Toeplitz and circulant matrices.

A symmetric tridiagonal Toeplitz matrix has constant diagonal ``c`` and
constant off-diagonals ``b``; the circulant variant wraps the band around
the corners.  Both are positive definite for ``c > 2|b|``, the only regime
used here (it is exactly where the chain Hessians live).

Determinants obey the three-term recurrence ``D_k = c D_{k-1} - b^2 D_{k-2}``
with ``D_0 = 1, D_1 = c``.  Its characteristic roots

    x1 = (c + sqrt(c^2 - 4 b^2)) / 2,    x2 = (c - sqrt(c^2 - 4 b^2)) / 2

satisfy x1 + x2 = c and x1 * x2 = b^2, giving the closed form
``D_k = (x1^{k+1} - x2^{k+1}) / (x1 - x2)``.  Raw determinants overflow
doubles near n ~ 700, so the inverse-row computation works throughout with
the scaled quantities d_k = D_k / x1^k and the ratios q = x2/x1,
r = b/x1; in that normalization the circulant determinant is
``x1^n * (1 + q^n - 2 (-r)^n)`` and every inverse entry is a ratio of
bounded terms, safe for n up to 10^6 and beyond.
"""

import math
from dataclasses import dataclass

import numpy as np


def _check_band(c: float, b: float):
    if not c > 2 * abs(b):
        raise ValueError(
            f"positive definiteness requires c > 2|b|, got c={c}, b={b}"
        )


@dataclass(frozen=True)
class SymTriToeplitz:
    """Symmetric tridiagonal Toeplitz matrix (diagonal c, band b, size n)."""

    c: float
    b: float
    n: int

    def __post_init__(self):
        _check_band(self.c, self.b)
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class SymTriCirculant:
    """Symmetric tridiagonal circulant matrix (band wraps the corners)."""

    c: float
    b: float
    n: int

    def __post_init__(self):
        _check_band(self.c, self.b)
        if self.n < 4:
            raise ValueError(f"n must be >= 4, got {self.n}")


def _roots(c: float, b: float):
    """Characteristic roots x1 >= x2 > 0 of t^2 - c t + b^2."""
    disc = math.sqrt(c * c - 4.0 * b * b)
    return (c + disc) / 2.0, (c - disc) / 2.0


def toeplitz_eigenvalues(m: SymTriToeplitz) -> np.ndarray:
    """nu_j = c + 2 b cos(pi j / (n+1)), j = 1..n."""
    j = np.arange(1, m.n + 1)
    return m.c + 2.0 * m.b * np.cos(np.pi * j / (m.n + 1))


def circulant_eigenvalues(m: SymTriCirculant) -> np.ndarray:
    """nu_j = c + 2 b cos(2 pi j / n), j = 1..n."""
    j = np.arange(1, m.n + 1)
    return m.c + 2.0 * m.b * np.cos(2.0 * np.pi * j / m.n)


def toeplitz_det(m: SymTriToeplitz) -> float:
    """D_n by forward recurrence.

    Exceeds the double range near n ~ 700 for typical c; the scaled forms
    used by :func:`circulant_inverse_row` stay finite at any n.
    """
    b2 = m.b * m.b
    d_prev, d = 1.0, m.c
    for _ in range(m.n - 1):
        d_prev, d = d, m.c * d - b2 * d_prev
    return d


def circulant_det(m: SymTriCirculant) -> float:
    """det M_n = D_n - b^2 D_{n-2} - 2 (-1)^n b^n."""
    b2 = m.b * m.b
    d_prev, d = 1.0, m.c  # D_0, D_1
    for _ in range(m.n - 2):
        d_prev, d = d, m.c * d - b2 * d_prev
    d_n = m.c * d - b2 * d_prev  # now d = D_{n-1}, d_prev = D_{n-2}
    return d_n - b2 * d_prev - 2.0 * (-m.b) ** m.n


def _scaled_dets(c: float, b: float, n: int) -> np.ndarray:
    """d_k = D_k / x1^k for k = 0..n, computed stably.

    d_k = (1 - q^{k+1}) / (1 - q) with q = x2/x1 in [0, 1); bounded by
    1/(1-q), so no overflow regardless of n.
    """
    if b == 0.0:
        return np.ones(n + 1)
    x1, x2 = _roots(c, b)
    q = x2 / x1
    k = np.arange(n + 1, dtype=float)
    # 1 - q^{k+1} via expm1 keeps full precision for q close to 0 or 1.
    return -np.expm1((k + 1.0) * math.log(q)) / (1.0 - q)


def toeplitz_inverse_row(m: SymTriToeplitz) -> np.ndarray:
    """First row (Lambda_{1k}, k = 1..n) of the inverse Toeplitz matrix.

    Cramer's rule gives Lambda_{1k} = (-1)^{k+1} b^{k-1} D_{n-k} / D_n,
    evaluated in root-scaled form as (-1)^{k+1} r^{k-1} d_{n-k} / (x1 d_n)
    so that no intermediate overflows for any n.

    Unlike the circulant row, these entries feel the open boundary: they
    approach the doubly infinite law (-1)^{k-1} (b/x1)^{k-1} / (x1 - x2)
    only up to a correction that itself decays geometrically in k at base
    b/x1 (for b > 0) -- the same boundary-layer rate seen in the energy
    minimizer.
    """
    n = m.n
    if m.b == 0.0:
        row = np.zeros(n)
        row[0] = 1.0 / m.c
        return row
    x1, _ = _roots(m.c, m.b)
    r = m.b / x1
    d = _scaled_dets(m.c, m.b, n)
    k = np.arange(1, n + 1)
    sign = np.where(k % 2 == 1, 1.0, -1.0)  # (-1)^{k+1}
    return sign * r ** (k - 1) * d[n - k] / (x1 * d[n])


def circulant_inverse_row(m: SymTriCirculant) -> np.ndarray:
    """First row (Lambda_{1k}, k = 1..n) of the inverse circulant.

    In root-scaled form, with r = b/x1, q = x2/x1 and d_k = D_k/x1^k:

        Lambda_{1k} = (-1)^{k+1} [ r^{k-1} d_{n-k} + (-1)^n r^{n-k+1} d_{k-2} ]
                      / ( x1 (1 + q^n - 2 (-r)^n) )

    with d_{-1} = 0 covering k = 1.  The full inverse is the circulant
    generated by this row.
    """
    n = m.n
    if m.b == 0.0:
        row = np.zeros(n)
        row[0] = 1.0 / m.c
        return row
    x1, x2 = _roots(m.c, m.b)
    q = x2 / x1
    r = m.b / x1
    d = _scaled_dets(m.c, m.b, n)
    dpad = np.concatenate(([0.0], d))  # dpad[k] = d_{k-1}
    denom = x1 * (1.0 + q**n - 2.0 * (-r) ** n)
    if denom <= 0.0 or not math.isfinite(denom):
        raise ValueError("singular circulant matrix")
    k = np.arange(1, n + 1)
    term1 = r ** (k - 1) * d[n - k]
    term2 = (-1.0) ** n * r ** (n - k + 1) * dpad[k - 1]
    sign = np.where(k % 2 == 1, 1.0, -1.0)  # (-1)^{k+1}
    return sign * (term1 + term2) / denom


def inverse_row_asymptotic(m: SymTriCirculant) -> tuple:
    """Large-n limits (Lambda11, ratio) of the inverse row.

    Lambda_{11} -> 1/(c - 2 b^2 / x1) and Lambda_{1,k+1}/Lambda_{1,k}
    -> -b/x1, so Lambda_{1k} ~ (-1)^{k-1} (b/x1)^{k-1} Lambda11.
    """
    x1, _ = _roots(m.c, m.b)
    lam11 = 1.0 / (m.c - 2.0 * m.b * m.b / x1)
    return lam11, m.b / x1
