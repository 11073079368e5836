"""Truncated real trigonometric series on (-pi, pi] and the Rayleigh quotient.

A series is u(theta) = sum_k a_k cos(k theta) + sum_k b_k sin(k theta),
with a_0 stored as the constant term itself (not halved).  The admissible
("constrained") series have a_0 = a_1 = b_1 = 0 exactly: zero average and
orthogonality to cos and sin.

The quotient of interest is

    J(u) = integral(u'^2 - u^2) / (integral |u|)^2,

whose numerator is the Parseval sum pi * sum_{k>=2} (k^2-1)(a_k^2 + b_k^2)
and whose denominator uses the L1 norm over one period.  The L1 norm, and
every integral of sgn(u) against a trigonometric polynomial, is computed
exactly by splitting the period at the (bisection-refined) sign changes of
u and evaluating trigonometric antiderivatives; a uniform grid is used only
to bracket the sign changes.  The convention sgn(0) = 0 never affects any
integral (the zero set of an admissible nonzero series has zero measure).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ConstraintViolationError,
    DegenerateInputError,
    InvalidInputError,
)

TWO_PI = 2.0 * np.pi

#: residual above which a series no longer counts as constrained
CONSTRAINT_TOL = 1e-14

#: refined zeros z satisfy |u(z)| <= this
ZERO_REFINE_TOL = 1e-12

#: L1 norms below this are treated as degenerate
DEGENERATE_L1_TOL = 1e-12


@dataclass(frozen=True)
class FourierSeries:
    """Real trigonometric polynomial of degree max_mode.

    cos_coeffs[k] multiplies cos(k theta) for k = 0..max_mode;
    sin_coeffs[k] multiplies sin(k theta) for k = 1..max_mode
    (sin_coeffs[0] is kept as an unused 0 so both arrays index by mode).
    """

    max_mode: int
    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        if self.max_mode < 2:
            raise InvalidInputError("max_mode must be >= 2")
        cos = np.asarray(self.cos_coeffs, dtype=float)
        sin = np.asarray(self.sin_coeffs, dtype=float)
        if cos.shape != (self.max_mode + 1,) or sin.shape != (self.max_mode + 1,):
            raise InvalidInputError("coefficient arrays must have length max_mode + 1")
        if not (np.all(np.isfinite(cos)) and np.all(np.isfinite(sin))):
            raise InvalidInputError("coefficients must be finite")
        if sin[0] != 0.0:
            raise InvalidInputError("sin_coeffs[0] must be 0")
        cos.setflags(write=False)
        sin.setflags(write=False)
        object.__setattr__(self, "cos_coeffs", cos)
        object.__setattr__(self, "sin_coeffs", sin)

    @staticmethod
    def from_modes(max_mode: int, cos: dict[int, float] | None = None,
                   sin: dict[int, float] | None = None) -> "FourierSeries":
        """Build a series from sparse {mode: coefficient} dicts."""
        a = np.zeros(max_mode + 1)
        b = np.zeros(max_mode + 1)
        for k, v in (cos or {}).items():
            a[k] = v
        for k, v in (sin or {}).items():
            if k == 0:
                raise InvalidInputError("sin mode 0 does not exist")
            b[k] = v
        return FourierSeries(max_mode, a, b)

    def scaled(self, c: float) -> "FourierSeries":
        return FourierSeries(self.max_mode, c * self.cos_coeffs, c * self.sin_coeffs)

    def to_json_dict(self) -> dict:
        return {
            "max_mode": self.max_mode,
            "cos": list(self.cos_coeffs),
            "sin": list(self.sin_coeffs[1:]),
        }

    @staticmethod
    def from_json_dict(obj: dict) -> "FourierSeries":
        n = int(obj["max_mode"])
        cos = np.asarray(obj["cos"], dtype=float)
        sin = np.concatenate([[0.0], np.asarray(obj["sin"], dtype=float)])
        return FourierSeries(n, cos, sin)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def loads(text: str) -> "FourierSeries":
        return FourierSeries.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class SampledFunction:
    """Values on the uniform grid theta_j = -pi + 2 pi j / M, j = 0..M-1."""

    grid_size: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid_size,):
            raise InvalidInputError("values must have length grid_size")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def thetas(self) -> np.ndarray:
        return -np.pi + TWO_PI * np.arange(self.grid_size) / self.grid_size

    def to_csv(self, fileobj) -> None:
        """Rows "theta,value" at 17 significant digits."""
        for t, v in zip(self.thetas(), self.values):
            fileobj.write(f"{t:.17g},{v:.17g}\n")


@lru_cache(maxsize=4)
def _grid_design(max_mode: int, grid_size: int):
    """Cached (COS, SIN) design matrices on the uniform grid."""
    theta = -np.pi + TWO_PI * np.arange(grid_size) / grid_size
    k = np.arange(max_mode + 1)
    kt = np.outer(theta, k)
    return np.cos(kt), np.sin(kt)


def evaluate(series: FourierSeries, theta):
    """Evaluate the series at theta (scalar or array)."""
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("theta must be finite")
    k = np.arange(series.max_mode + 1)
    kt = np.multiply.outer(arr, k)
    out = np.cos(kt) @ series.cos_coeffs + np.sin(kt) @ series.sin_coeffs
    return float(out) if np.isscalar(theta) or arr.ndim == 0 else out


def sample(series: FourierSeries, grid_size: int) -> SampledFunction:
    """Sample on the uniform grid; requires grid_size >= 4 * max_mode so the
    rectangle rule stays exact for the quadratic quantities of the series."""
    if grid_size < 4 * series.max_mode:
        raise InvalidInputError(
            f"grid_size {grid_size} < 4 * max_mode = {4 * series.max_mode}")
    cosm, sinm = _grid_design(series.max_mode, grid_size)
    return SampledFunction(grid_size, cosm @ series.cos_coeffs + sinm @ series.sin_coeffs)


def quadrature(f: SampledFunction) -> float:
    """Uniform-grid rectangle rule (2 pi / M) * sum(values).

    Exact (to rounding) for trigonometric polynomials of degree < M;
    O(h^2) for merely piecewise-smooth integrands such as |u|.
    """
    if f.grid_size < 2:
        raise InvalidInputError("need at least 2 samples")
    return TWO_PI / f.grid_size * float(np.sum(f.values))


def project_constraints(series: FourierSeries) -> FourierSeries:
    """Zero out a_0, a_1, b_1; all other coefficients unchanged."""
    cos = series.cos_coeffs.copy()
    sin = series.sin_coeffs.copy()
    cos[0] = cos[1] = sin[1] = 0.0
    return FourierSeries(series.max_mode, cos, sin)


def constraint_residuals(series: FourierSeries) -> tuple[float, float, float]:
    """(integral u, integral u cos, integral u sin) from the coefficients."""
    return (TWO_PI * series.cos_coeffs[0],
            np.pi * series.cos_coeffs[1],
            np.pi * series.sin_coeffs[1])


def is_constrained(series: FourierSeries, tol: float = CONSTRAINT_TOL) -> bool:
    return (abs(series.cos_coeffs[0]) <= tol
            and abs(series.cos_coeffs[1]) <= tol
            and abs(series.sin_coeffs[1]) <= tol)


def _require_constrained(series: FourierSeries) -> None:
    if not is_constrained(series):
        raise ConstraintViolationError(
            "series has nonzero mean or first modes; project_constraints first")


def derivative(series: FourierSeries) -> FourierSeries:
    """Spectral derivative: mode k maps (a_k, b_k) -> (k b_k, -k a_k)."""
    k = np.arange(series.max_mode + 1)
    return FourierSeries(series.max_mode, k * series.sin_coeffs, -k * series.cos_coeffs)


def translate(series: FourierSeries, a: float) -> FourierSeries:
    """u(.) -> u(. + a), as an exact rotation of each mode's phase."""
    if not np.isfinite(a):
        raise InvalidInputError("shift must be finite")
    k = np.arange(series.max_mode + 1)
    ca, sa = np.cos(k * a), np.sin(k * a)
    cos = series.cos_coeffs * ca + series.sin_coeffs * sa
    sin = series.sin_coeffs * ca - series.cos_coeffs * sa
    sin[0] = 0.0
    return FourierSeries(series.max_mode, cos, sin)


def energy_numerator(series: FourierSeries) -> float:
    """integral(u'^2 - u^2) = pi * sum_{k>=2} (k^2 - 1)(a_k^2 + b_k^2).

    Requires a constrained series (the identity needs a_0 = a_1 = b_1 = 0);
    nonnegative there, vanishing only for u = 0.
    """
    _require_constrained(series)
    k = np.arange(2, series.max_mode + 1)
    return np.pi * float(np.sum((k * k - 1.0) *
                                (series.cos_coeffs[2:] ** 2 + series.sin_coeffs[2:] ** 2)))


def antiderivative_values(series: FourierSeries, theta: np.ndarray) -> np.ndarray:
    """F(theta) with F' = u: a_0 theta + sum_k (a_k sin k theta - b_k cos k theta)/k."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(1, series.max_mode + 1)
    kt = np.multiply.outer(theta, k)
    out = (np.sin(kt) @ (series.cos_coeffs[1:] / k)
           - np.cos(kt) @ (series.sin_coeffs[1:] / k))
    return out + series.cos_coeffs[0] * theta


def find_sign_changes(series: FourierSeries, grid_size: int = 0):
    """Locate the sign-changing zeros of the series over one period.

    Sign changes are bracketed on a uniform grid and refined by scalar root
    finding until |u| <= ZERO_REFINE_TOL at each zero.  Grid samples that sit
    on a zero (to rounding) are resolved by the neighboring signs, so zeros
    where u touches 0 without changing sign are not reported.

    Returns (zeros, signs): zeros ascending in [-pi, pi), signs[i] = sign of u
    on (zeros[i], zeros[i+1]) with wrap-around.  Raises DegenerateInputError
    when fewer than 2 sign changes exist.
    """
    m = max(grid_size, 4 * series.max_mode, 64)
    cosm, sinm = _grid_design(series.max_mode, m)
    v = cosm @ series.cos_coeffs + sinm @ series.sin_coeffs
    theta = -np.pi + TWO_PI * np.arange(m) / m
    scale = float(np.max(np.abs(v)))
    if scale <= 0.0:
        raise DegenerateInputError("series is identically zero on the grid")
    zeroish = np.abs(v) <= 1e-13 * scale
    idx = np.nonzero(~zeroish)[0]
    if idx.size < 2:
        raise DegenerateInputError("series is numerically zero almost everywhere")

    def u(t: float) -> float:
        return evaluate(series, t)

    h = TWO_PI / m
    zeros = []
    for j in range(idx.size):
        i0 = idx[j]
        i1 = idx[(j + 1) % idx.size]
        s0, s1 = np.sign(v[i0]), np.sign(v[i1])
        if s0 == s1:
            continue
        lo = theta[i0]
        hi = theta[i1] if i1 > i0 else theta[i1] + TWO_PI
        # shrink the bracket ends off exact zeros of u
        flo, fhi = v[i0], v[i1]
        z = brentq(u, lo, hi, xtol=1e-15, rtol=8.9e-16) if flo * fhi < 0 else None
        if z is None:  # pragma: no cover - brentq handles all bracketed cases
            continue
        zeros.append(z)
    if len(zeros) < 2:
        raise DegenerateInputError("fewer than 2 sign changes in one period")
    zeros = np.asarray(zeros)
    zeros = np.sort(np.where(zeros >= np.pi, zeros - TWO_PI, zeros))
    # merge duplicates (a zero can be found twice across the period wrap)
    keep = [float(zeros[0])]
    for z in zeros[1:]:
        if z - keep[-1] > 1e-10:
            keep.append(float(z))
    if len(keep) > 1 and (keep[0] + TWO_PI) - keep[-1] <= 1e-10:
        keep.pop()
    zeros = np.asarray(keep)
    if zeros.size < 2 or zeros.size % 2:
        raise DegenerateInputError(
            f"inconsistent sign-change count {zeros.size} (periodicity needs an even count)")
    mids = zeros + np.diff(np.concatenate([zeros, [zeros[0] + TWO_PI]])) / 2.0
    signs = np.sign(evaluate(series, mids))
    return zeros, signs


def integral_between(series: FourierSeries, lo: float, hi: float) -> float:
    """Exact integral of the series over [lo, hi]."""
    f = antiderivative_values(series, np.array([lo, hi]))
    return float(f[1] - f[0])


def l1_norm(series: FourierSeries, grid_size: int = 0) -> float:
    """integral |u| over one period, exact up to zero-refinement error.

    The period is split at the sign changes of u and each piece is integrated
    with the trigonometric antiderivative.  A series without sign changes has
    integral |u| = |integral u| = 2 pi |a_0|.
    """
    try:
        zeros, signs = find_sign_changes(series, grid_size)
    except DegenerateInputError:
        return abs(TWO_PI * series.cos_coeffs[0])
    ends = np.concatenate([zeros, [zeros[0] + TWO_PI]])
    f = antiderivative_values(series, ends)
    return float(np.sum(np.abs(np.diff(f))))


def sign_basis_integrals(series: FourierSeries, grid_size: int = 0,
                         max_k: int | None = None):
    """Exact (g0, gc, gs) with g0 = integral sgn(u), gc[k] = integral
    sgn(u) cos(k theta), gs[k] = integral sgn(u) sin(k theta), k = 1..max_k.

    gc and gs are indexed by mode (entry 0 unused, kept 0).
    """
    if max_k is None:
        max_k = series.max_mode
    zeros, signs = find_sign_changes(series, grid_size)
    ends = np.concatenate([zeros, [zeros[0] + TWO_PI]])
    k = np.arange(1, max_k + 1)
    skz = np.sin(np.outer(ends, k))
    ckz = np.cos(np.outer(ends, k))
    g0 = float(np.sum(signs * np.diff(ends)))
    gc = np.concatenate([[0.0], (signs @ np.diff(skz, axis=0)) / k])
    gs = np.concatenate([[0.0], (signs @ -np.diff(ckz, axis=0)) / k])
    return g0, gc, gs


def rayleigh_J(series: FourierSeries, grid_size: int = 0) -> float:
    """J(u) = energy_numerator / (integral |u|)^2 for a constrained series.

    Invariant under scaling u -> c u and translation u(.) -> u(. + a).
    """
    _require_constrained(series)
    denom = l1_norm(series, grid_size)
    if denom < DEGENERATE_L1_TOL:
        raise DegenerateInputError("integral |u| is numerically zero")
    return energy_numerator(series) / denom ** 2
