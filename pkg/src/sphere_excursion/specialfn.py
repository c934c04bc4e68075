"""Scalar special functions used throughout the package.

Ultraspherical (Gegenbauer) and Chebyshev polynomials, probabilists'
Hermite polynomials, the Gaussian tail factor ``psi``, Euler-characteristic
densities, unit-sphere areas and chi-distribution tails.

All functions accept scalars or numpy arrays for the continuous argument
and are pure.
"""

import math

import numpy as np
from scipy import special

# Inner products of unit vectors may leave [-1, 1] by round-off.
CLAMP_BAND = 1e-12


def _clamp_unit(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + CLAMP_BAND):
        raise ValueError("argument outside [-1, 1] beyond the clamp band")
    return np.clip(t, -1.0, 1.0)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def chebyshev_eval(n, t):
    """Chebyshev polynomial of the first kind, ``cos(n * arccos t)``."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    t = _clamp_unit(t)
    return _scalar_or_array(np.cos(n * np.arccos(t)))


def gegenbauer_eval(n, lam, t):
    """Ultraspherical polynomial ``P_n^lam(t)``.

    Uses the ascending three-term recurrence

        k P_k = 2 t (k + lam - 1) P_{k-1} - (k + 2 lam - 2) P_{k-2},

    started from ``P_0 = 1`` and ``P_1 = 2 lam t``.  ``lam == 0`` is the
    Chebyshev branch ``T_n``.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    if lam < 0:
        raise ValueError("index must be nonnegative")
    if lam == 0:
        return chebyshev_eval(n, t)
    t = _clamp_unit(t)
    p_prev = np.ones_like(t)
    if n == 0:
        return _scalar_or_array(p_prev)
    p = 2.0 * lam * t
    for k in range(2, n + 1):
        p_prev, p = p, (2.0 * t * (k + lam - 1.0) * p - (k + 2.0 * lam - 2.0) * p_prev) / k
    return _scalar_or_array(p)


def gegenbauer_table(n_max, lam, t):
    """All of ``P_0^lam(t) .. P_{n_max}^lam(t)`` stacked along a new first axis."""
    t = _clamp_unit(t)
    out = np.empty((n_max + 1,) + t.shape)
    if lam == 0:
        theta = np.arccos(t)
        for k in range(n_max + 1):
            out[k] = np.cos(k * theta)
        return out
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * lam * t
    for k in range(2, n_max + 1):
        out[k] = (2.0 * t * (k + lam - 1.0) * out[k - 1] - (k + 2.0 * lam - 2.0) * out[k - 2]) / k
    return out


def gegenbauer_at_one(n, lam):
    """``P_n^lam(1) = binom(n + 2 lam - 1, n)``; equal to 1 on the Chebyshev branch.

    Integer ``2 lam`` goes through exact integer binomials, other indices
    through log-gamma so that large ``n`` does not overflow intermediates.
    """
    if n < 0 or lam < 0:
        raise ValueError("degree and index must be nonnegative")
    if lam == 0 or n == 0:
        return 1.0
    two_lam = 2.0 * lam
    if two_lam == round(two_lam):
        return float(math.comb(n + int(round(two_lam)) - 1, n))
    log_val = math.lgamma(n + two_lam) - math.lgamma(n + 1) - math.lgamma(two_lam)
    return math.exp(log_val)


def gegenbauer_derivative(n, lam, t):
    """Derivative of ``P_n^lam`` at ``t`` from the index-raising identities.

    ``2 lam P_{n-1}^{lam+1}(t)`` for ``lam > 0`` and ``n P_{n-1}^1(t)`` on the
    Chebyshev branch; zero for ``n == 0``.
    """
    if n == 0:
        return _scalar_or_array(np.zeros_like(_clamp_unit(t)))
    if lam == 0:
        return _scalar_or_array(n * np.asarray(gegenbauer_eval(n - 1, 1.0, t)))
    return _scalar_or_array(2.0 * lam * np.asarray(gegenbauer_eval(n - 1, lam + 1.0, t)))


def hermite(j, u):
    """Probabilists' Hermite polynomial ``H_j(u)`` via ``H_{k+1} = u H_k - k H_{k-1}``."""
    if j < 0:
        raise ValueError("order must be nonnegative")
    u = np.asarray(u, dtype=float)
    h_prev = np.ones_like(u)
    if j == 0:
        return _scalar_or_array(h_prev)
    h = u.copy()
    for k in range(1, j):
        h_prev, h = h, u * h - k * h_prev
    return _scalar_or_array(h)


def gauss_tail_psi(u):
    """``psi(u) = exp(-u^2/2) / (sqrt(2 pi) u)`` for ``u > 0``."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("psi is defined for u > 0 only")
    return _scalar_or_array(np.exp(-0.5 * u * u) / (math.sqrt(2.0 * math.pi) * u))


def ec_density(j, u):
    """Euler-characteristic density ``rho_j(u)`` of a unit-variance Gaussian field.

    ``rho_0`` is the standard normal upper tail, taken from ``erfc`` so the
    far tail keeps full relative accuracy.
    """
    if j < 0:
        raise ValueError("order must be nonnegative")
    u = np.asarray(u, dtype=float)
    if j == 0:
        return _scalar_or_array(0.5 * special.erfc(u / math.sqrt(2.0)))
    scale = (2.0 * math.pi) ** (-(j + 1) / 2.0)
    return _scalar_or_array(scale * np.asarray(hermite(j - 1, u)) * np.exp(-0.5 * u * u))


def sphere_area(j):
    """Surface area of the unit ``j``-sphere, ``2 pi^((j+1)/2) / Gamma((j+1)/2)``."""
    if j < 0:
        raise ValueError("dimension must be nonnegative")
    return 2.0 * math.pi ** ((j + 1) / 2.0) / math.gamma((j + 1) / 2.0)


def chi_tail(k, u):
    """``P(|xi| >= u)`` for ``xi`` standard Gaussian in ``R^k``."""
    if k < 1 or int(k) != k:
        raise ValueError("degrees of freedom must be a positive integer")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    return _scalar_or_array(special.gammaincc(k / 2.0, 0.5 * u * u))
