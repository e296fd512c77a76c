"""Modified Bessel functions I0 and I1 of real nonnegative argument.

Power series below ``CROSSOVER``, Hankel asymptotic expansion above it.
Both paths are vectorized over numpy arrays and give relative error
below ~1e-14 on [0, 700]. The exponentially scaled forms ``i0e``/``i1e``
(``exp(-z) * I(z)``) never overflow and are what the kernels use.
"""
from __future__ import annotations

import numpy as np

CROSSOVER = 20.0
_SERIES_TERMS = 64
_ASYMP_TERMS = 40
_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _check(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("Bessel argument must be finite")
    if np.any(z < 0):
        raise ValueError("Bessel argument must be nonnegative")
    return z


def _series(z, order):
    # sum_k (z^2/4)^k / (k! (k+order)!), times (z/2)^order
    q = 0.25 * z * z
    term = np.ones_like(z) if order == 0 else 0.5 * z
    total = term.copy()
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + order))
        total = total + term
        if np.all(term <= 1e-17 * total):
            break
    return total


def _asymptotic_scaled(z, order):
    # exp(-z) I_nu(z) ~ 1/sqrt(2 pi z) * sum_k (-1)^k a_k(nu) / z^k
    mu = 4.0 * order * order
    term = np.ones_like(z)
    total = term.copy()
    for k in range(1, _ASYMP_TERMS):
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # stop before the divergent tail of the expansion
        if np.all(np.abs(new) < 1e-17) or np.any(np.abs(new) > np.abs(term)):
            break
        term = new
        total = total + term
    return total / (_SQRT_2PI * np.sqrt(z))


def _evaluate(z, order, scaled):
    z = _check(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    small = z < CROSSOVER
    if np.any(small):
        zs = z[small]
        s = _series(zs, order)
        out[small] = s * np.exp(-zs) if scaled else s
    if np.any(~small):
        zl = z[~small]
        a = _asymptotic_scaled(zl, order)
        out[~small] = a if scaled else a * np.exp(zl)
    return float(out[0]) if scalar else out


def bessel_i0(z):
    """I0(z) for z >= 0; scalar in, float out, arrays elementwise."""
    return _evaluate(z, 0, scaled=False)


def bessel_i1(z):
    """I1(z) for z >= 0."""
    return _evaluate(z, 1, scaled=False)


def i0e(z):
    """exp(-z) * I0(z)."""
    return _evaluate(z, 0, scaled=True)


def i1e(z):
    """exp(-z) * I1(z)."""
    return _evaluate(z, 1, scaled=True)
