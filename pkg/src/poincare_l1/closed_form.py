"""The exact minimizer of the constrained quotient.

The minimum of J over the constrained space is

    m* = 1 / (2 (4 - pi)) = 0.5824740457906858...

attained by the odd, pi-periodic function equal to c (cos t + sin t - 1) on
[0, pi/2].  With the normalization integral |u| = 1 the amplitude is c = m*
and the integral of |u| over each of the four nodal intervals is exactly 1/4.

Its Fourier expansion has sine modes only, at k = 2, 6, 10, ...:

    b_k = 8 m* / (pi k (k^2 - 1)),   k = 2 (mod 4),

so coefficients decay like k^-3 (the function is C^1 with piecewise-smooth
second derivative).
"""

from __future__ import annotations

import numpy as np

from .series import FourierSeries

#: the optimal value of the quotient, 1 / (2 (4 - pi))
OPTIMAL_VALUE = 1.0 / (2.0 * (4.0 - np.pi))

#: integral of |u| over one nodal interval at the normalized amplitude
QUARTER_L1 = OPTIMAL_VALUE * (2.0 - np.pi / 2.0)


def optimal_value() -> float:
    """m* = 1 / (2 (4 - pi))."""
    return OPTIMAL_VALUE


def evaluate_closed_form(theta, scale: float = OPTIMAL_VALUE):
    """Evaluate the closed-form minimizer pointwise.

    scale is the amplitude of the cos + sin - 1 profile; the default gives
    integral |u| = 1 over one period.
    """
    t = np.mod(np.asarray(theta, dtype=float), np.pi)
    first_half = t <= np.pi / 2
    vals = np.where(first_half,
                    np.cos(t) + np.sin(t) - 1.0,
                    np.cos(t) - np.sin(t) + 1.0)
    out = scale * vals
    return float(out) if np.isscalar(theta) else out


def closed_form_series(max_mode: int, scale: float = OPTIMAL_VALUE) -> FourierSeries:
    """Truncation of the exact Fourier expansion to degree max_mode."""
    k = np.arange(max_mode + 1)
    b = np.zeros(max_mode + 1)
    active = (k >= 2) & (k % 4 == 2)
    kk = k[active].astype(float)
    b[active] = 8.0 * scale / (np.pi * kk * (kk * kk - 1.0))
    return FourierSeries(max_mode, np.zeros(max_mode + 1), b)


def closed_form_zeros() -> np.ndarray:
    """Sign-change zeros in [-pi, pi): -pi, -pi/2, 0, pi/2."""
    return np.array([-np.pi, -np.pi / 2.0, 0.0, np.pi / 2.0])


def closed_form_signs() -> np.ndarray:
    """Signs on the intervals between consecutive zeros (wrap included)."""
    return np.array([1.0, -1.0, 1.0, -1.0])
