"""Bessel functions of the first kind, orders 0 and 1.

Power series near the origin, Hankel asymptotic expansion beyond
``SERIES_LIMIT``.  Absolute error stays below 1e-10 for |x| <= 1e3.
"""

import math

import numpy as np

# Series round-off grows like max_k (x/2)^(2k)/k!^2 * eps; the asymptotic
# tail shrinks like exp(-2x).  Both sit near 1e-12 at the crossover.
SERIES_LIMIT = 12.0
_SERIES_TERMS = 60
_ASYMPTOTIC_TERMS = 24


def _series(x, order):
    q = -0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + order))
        total = total + term
    return total


def _hankel_coefficients(order, n):
    mu = 4.0 * order * order
    coeffs = [1.0]
    for k in range(1, n):
        coeffs.append(coeffs[-1] * (mu - (2 * k - 1) ** 2) / (k * 8.0))
    return coeffs


_HANKEL = {0: _hankel_coefficients(0, _ASYMPTOTIC_TERMS), 1: _hankel_coefficients(1, _ASYMPTOTIC_TERMS)}


def _asymptotic(x, order):
    coeffs = _HANKEL[order]
    inv = 1.0 / x
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    power = np.ones_like(x)
    for k, a in enumerate(coeffs):
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p = p + sign * a * power
        else:
            q = q + sign * a * power
        power = power * inv
    chi = x - (0.5 * order + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def _bessel(x, order):
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    out = np.empty_like(ax)
    near = ax <= SERIES_LIMIT
    if near.any():
        out[near] = _series(ax[near], order)
    if (~near).any():
        out[~near] = _asymptotic(ax[~near], order)
    if order == 1:
        out = np.where(arr < 0, -out, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def bessel_j0(x):
    """J0(x) for scalar or array input."""
    return _bessel(x, 0)


def bessel_j1(x):
    """J1(x) for scalar or array input."""
    return _bessel(x, 1)
