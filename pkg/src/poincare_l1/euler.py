"""Stationarity structure of the quotient: multipliers, nodal partitions,
per-interval closed forms, and the consistency relations between them.

A minimizer u (normalized to integral |u| = 1, value m) satisfies, almost
everywhere,

    -u'' - u = m sgn(u) + lambda0 + lambda1 cos(theta) + lambda2 sin(theta),

with multipliers

    lambda0 = -(m / 2 pi) integral sgn(u),
    lambda1 = -(m / pi)   integral sgn(u) cos(theta),
    lambda2 = -(m / pi)   integral sgn(u) sin(theta).

On a nodal interval [a, b] where u has sign s the solution is

    u(x) = A cos x + B sin x - (s m + lambda0) - (lambda1 / 2) x sin x,

with A, B fixed by u(a) = u(b) = 0.  Everything here is a pure function of
its inputs; the integrals of sgn(u) are evaluated exactly between refined
zeros (see series.sign_basis_integrals).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateInputError, InvalidInputError, SingularLengthError
from .series import (
    DEGENERATE_L1_TOL,
    FourierSeries,
    find_sign_changes,
    l1_norm,
    sign_basis_integrals,
    translate,
)

TWO_PI = 2.0 * np.pi

#: |sin(length)| below this routes to the Fredholm compatibility relation
SINGULAR_LENGTH_TOL = 1e-9

#: |sin((l_{k+2} - l_k)/2)| below this flags the ratio forms not-applicable
EQUAL_LENGTH_GUARD = 1e-6


@dataclass(frozen=True)
class Multipliers:
    """The quadruple (m, lambda0, lambda1, lambda2) of the stationarity
    equation.  For multipliers extracted from a normalized candidate,
    m + lambda0 > 0 and -m + lambda0 < 0."""

    m: float
    lambda0: float
    lambda1: float
    lambda2: float

    def to_json_dict(self) -> dict:
        return {"m": self.m, "lambda0": self.lambda0,
                "lambda1": self.lambda1, "lambda2": self.lambda2}

    @staticmethod
    def from_json_dict(obj: dict) -> "Multipliers":
        return Multipliers(float(obj["m"]), float(obj["lambda0"]),
                           float(obj["lambda1"]), float(obj["lambda2"]))


@dataclass(frozen=True)
class NodalPartition:
    """Ordered sign-change points a_0 < ... < a_n with a_n = a_0 + 2 pi.

    endpoints holds all n+1 values including the wrap; the sign of u on
    (a_i, a_{i+1}) is first_sign * (-1)^i.  n is even by periodicity.
    """

    endpoints: np.ndarray
    first_sign: int

    def __post_init__(self):
        ends = np.asarray(self.endpoints, dtype=float)
        if ends.ndim != 1 or ends.size < 3:
            raise InvalidInputError("endpoints must hold at least 2 intervals")
        if not np.all(np.diff(ends) > 0):
            raise InvalidInputError("endpoints must be strictly increasing")
        if abs((ends[-1] - ends[0]) - TWO_PI) > 1e-9:
            raise InvalidInputError("endpoints must span exactly one period")
        if (ends.size - 1) % 2:
            raise InvalidInputError("number of nodal intervals must be even")
        if self.first_sign not in (-1, 1):
            raise InvalidInputError("first_sign must be +1 or -1")
        ends.setflags(write=False)
        object.__setattr__(self, "endpoints", ends)

    @property
    def count(self) -> int:
        return self.endpoints.size - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.endpoints)

    def sign(self, i: int) -> int:
        return self.first_sign * (1 if i % 2 == 0 else -1)

    def signs(self) -> np.ndarray:
        return self.first_sign * (-1.0) ** np.arange(self.count)

    def negative_measure(self) -> float:
        """Total length of the intervals where u < 0."""
        return float(np.sum(self.lengths[self.signs() < 0]))

    def to_json_dict(self) -> dict:
        return {"endpoints": list(self.endpoints), "first_sign": self.first_sign}

    @staticmethod
    def from_json_dict(obj: dict) -> "NodalPartition":
        return NodalPartition(np.asarray(obj["endpoints"], dtype=float),
                              int(obj["first_sign"]))


@dataclass(frozen=True)
class Piece:
    """One nodal interval [lo, hi] of a piecewise solution:
    u(x) = cos_coeff cos x + sin_coeff sin x + constant + slope_coeff x sin x."""

    lo: float
    hi: float
    sign: int
    cos_coeff: float
    sin_coeff: float
    constant: float
    slope_coeff: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return (self.cos_coeff * np.cos(x) + self.sin_coeff * np.sin(x)
                + self.constant + self.slope_coeff * x * np.sin(x))

    def deriv1(self, x):
        x = np.asarray(x, dtype=float)
        return (-self.cos_coeff * np.sin(x) + self.sin_coeff * np.cos(x)
                + self.slope_coeff * (np.sin(x) + x * np.cos(x)))

    def deriv2(self, x):
        x = np.asarray(x, dtype=float)
        return (-self.cos_coeff * np.cos(x) - self.sin_coeff * np.sin(x)
                + self.slope_coeff * (2.0 * np.cos(x) - x * np.sin(x)))


@dataclass(frozen=True)
class PiecewiseSolution:
    pieces: tuple[Piece, ...]


def nodal_partition(u: FourierSeries, grid_size: int = 0) -> NodalPartition:
    """Partition of one period at the sign-change zeros of the series.

    Zeros are bracketed on the grid and refined by bisection to
    |u| <= 1e-12; interior zeros without a sign change do not split a
    nodal interval.  Raises DegenerateInputError below 2 sign changes.
    """
    zeros, signs = find_sign_changes(u, grid_size)
    ends = np.concatenate([zeros, [zeros[0] + TWO_PI]])
    return NodalPartition(ends, int(signs[0]))


def compute_multipliers(u: FourierSeries, grid_size: int, m: float) -> Multipliers:
    """Extract (lambda0, lambda1, lambda2) for the value m via the exact
    integrals of sgn(u) against 1, cos, sin."""
    if l1_norm(u, grid_size) < DEGENERATE_L1_TOL:
        raise DegenerateInputError("integral |u| is numerically zero")
    g0, gc, gs = sign_basis_integrals(u, grid_size, max_k=1)
    return Multipliers(m=m,
                       lambda0=-m / TWO_PI * g0,
                       lambda1=-m / np.pi * gc[1],
                       lambda2=-m / np.pi * gs[1])


def phase_align(u: FourierSeries, m: float,
                grid_size: int = 0) -> tuple[FourierSeries, Multipliers]:
    """Translate u so the sin-multiplier vanishes.

    Translating by a maps (lambda1, lambda2) to
    (cos(a) lambda1 + sin(a) lambda2, cos(a) lambda2 - sin(a) lambda1),
    so lambda2(a) has a root at a = atan2(lambda2, lambda1); the branch with
    lambda1(a) <= 0 is returned.  The result is re-verified on the translated
    series (|lambda2| <= 1e-10), with a bisection fallback on the recomputed
    lambda2 if the closed-form root were ever off.
    """
    mult = compute_multipliers(u, grid_size, m)
    r = math.hypot(mult.lambda1, mult.lambda2)
    if r < 1e-14:
        return u, mult

    a0 = math.atan2(mult.lambda2, mult.lambda1) + math.pi  # lambda1(a0) = -r
    a0 = a0 % TWO_PI

    def aligned(a: float):
        v = translate(u, a)
        return v, compute_multipliers(v, grid_size, m)

    v, mv = aligned(a0)
    if abs(mv.lambda2) <= 1e-10:
        return v, mv
    # fallback: lambda2(a) changes sign across the closed-form root
    lam2 = lambda a: aligned(a)[1].lambda2
    lo, hi = a0 - 0.05, a0 + 0.05
    if lam2(lo) * lam2(hi) > 0:  # pragma: no cover - defensive
        raise DegenerateInputError("could not bracket the alignment root")
    a1 = brentq(lam2, lo, hi, xtol=1e-14)
    return aligned(a1)


def piece_coefficients(a: float, b: float, sign: int, mult: Multipliers) -> Piece:
    """Coefficients of the solution on a nodal interval [a, b] of sign s:

        A = (s m + l0) cos((a+b)/2)/cos((b-a)/2)
            - (l1/2) (b-a) sin a sin b / sin(b-a),
        B = (s m + l0) sin((a+b)/2)/cos((b-a)/2)
            + (l1/2) (b sin b cos a - a sin a cos b) / sin(b-a),

    and the piece vanishes at both endpoints.  A length-pi interval is
    singular here; use fredholm_relation for its compatibility condition.
    """
    ell = b - a
    if not 0.0 < ell < TWO_PI:
        raise InvalidInputError("need 0 < b - a < 2 pi")
    if sign not in (-1, 1):
        raise InvalidInputError("sign must be +1 or -1")
    if abs(math.sin(ell)) < 1e-12:
        raise SingularLengthError(
            "interval length is pi (or the period): the generic formulas are "
            "singular; use fredholm_relation for the length-pi condition")
    q = sign * mult.m + mult.lambda0
    half = mult.lambda1 / 2.0
    sa, sb = math.sin(a), math.sin(b)
    ca, cb = math.cos(a), math.cos(b)
    A = q * math.cos((a + b) / 2) / math.cos(ell / 2) - half * ell * sa * sb / math.sin(ell)
    B = (q * math.sin((a + b) / 2) / math.cos(ell / 2)
         + half * (b * sb * ca - a * sa * cb) / math.sin(ell))
    return Piece(lo=a, hi=b, sign=sign, cos_coeff=A, sin_coeff=B,
                 constant=-q, slope_coeff=-half)


def matched_piece_coefficients(a: float, b: float,
                               mult: Multipliers) -> tuple[float, float]:
    """(A, B) for the interval following a positive [a, b], obtained from the
    C^1 matching at b instead of the endpoint conditions.  Equal to the
    direct coefficients exactly when the two-interval relation holds."""
    pos = piece_coefficients(a, b, +1, mult)
    A0, B0 = pos.cos_coeff, pos.sin_coeff
    sb, cb = math.sin(b), math.cos(b)
    half = mult.lambda1 / 2.0
    q1 = mult.lambda0 - mult.m
    A1 = q1 * cb + half * b * sb * cb - B0 * sb * cb + A0 * sb * sb
    B1 = q1 * sb + half * b * sb * sb + B0 * cb * cb - A0 * sb * cb
    return A1, B1


def solution_from_partition(partition: NodalPartition,
                            mult: Multipliers) -> PiecewiseSolution:
    ends = partition.endpoints
    pieces = tuple(
        piece_coefficients(ends[i], ends[i + 1], partition.sign(i), mult)
        for i in range(partition.count))
    return PiecewiseSolution(pieces)


def euler_residual(pw: PiecewiseSolution, partition: NodalPartition,
                   mult: Multipliers, points_per_piece: int = 512) -> float:
    """sup over interior points of |-u'' - u - m sgn(u) - lambda0
    - lambda1 cos - lambda2 sin|, with exact piece derivatives.

    A 1e-6 neighborhood of each nodal endpoint is excluded: the equation
    only holds away from the sign jumps.
    """
    if len(pw.pieces) != partition.count:
        raise InvalidInputError("pieces do not cover the partition")
    worst = 0.0
    for piece in pw.pieces:
        lo, hi = piece.lo + 1e-6, piece.hi - 1e-6
        if hi <= lo:
            continue
        x = np.linspace(lo, hi, points_per_piece)
        res = (-piece.deriv2(x) - piece.value(x)
               - mult.m * piece.sign - mult.lambda0
               - mult.lambda1 * np.cos(x) - mult.lambda2 * np.sin(x))
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def interval_relation_residual(l1: float, l2: float, a: float, c: float,
                               mult: Multipliers, first_sign: int = +1) -> float:
    """Residual of the two-consecutive-interval relation

        lambda0 sin((l1+l2)/2) -+ m sin((l2-l1)/2)
            = (lambda1/2) cos(l1/2) cos(l2/2)
              [ (l1/sin l1) sin a - (l2/sin l2) sin c ],

    with the minus sign when the first interval is positive (first_sign=+1)
    and plus when it is negative.  Vanishes on consecutive nodal intervals of
    a genuine stationary solution."""
    if not (0.0 < l1 < np.pi and 0.0 < l2 < np.pi):
        raise InvalidInputError("interval lengths must lie in (0, pi)")
    if abs((a + l1 + l2) - c) > 1e-9:
        raise InvalidInputError("need c = a + l1 + l2")
    lhs = (mult.lambda0 * math.sin((l1 + l2) / 2)
           - first_sign * mult.m * math.sin((l2 - l1) / 2))
    rhs = (mult.lambda1 / 2.0 * math.cos(l1 / 2) * math.cos(l2 / 2)
           * (l1 / math.sin(l1) * math.sin(a) - l2 / math.sin(l2) * math.sin(c)))
    return lhs - rhs


def fredholm_relation(a: float, mult: Multipliers) -> float:
    """Residual (m + lambda0) - (lambda1/4) pi sin(a) of the compatibility
    condition for a positive nodal interval of length exactly pi starting
    at a (the forcing must be orthogonal to sin(x - a))."""
    return (mult.m + mult.lambda0) - mult.lambda1 / 4.0 * np.pi * math.sin(a)


def nodal_integral(a: float, b: float, sign: int, mult: Multipliers) -> float:
    """Exact integral of the piece over its nodal interval [a, b]:

        (s m + l0) (2 tan(l/2) - l)
          + (l1/2) * 2 sin(l/2) cos((a+b)/2) * (l/sin l - 1),   l = b - a.

    Singular at l = pi (tan blows up); SingularLengthError directs the
    caller to fredholm_relation there."""
    ell = b - a
    if not 0.0 < ell < TWO_PI:
        raise InvalidInputError("need 0 < b - a < 2 pi")
    if abs(math.sin(ell)) < SINGULAR_LENGTH_TOL and abs(ell - np.pi) < 1.0:
        raise SingularLengthError(
            "interval length is pi: integral has no generic closed form; "
            "see fredholm_relation")
    q = sign * mult.m + mult.lambda0
    bracket = ell / math.sin(ell) - 1.0
    return (q * (2.0 * math.tan(ell / 2) - ell)
            + mult.lambda1 / 2.0 * 2.0 * math.sin(ell / 2)
            * math.cos((a + b) / 2) * bracket)


def a_quantity(a_k: float, ell_k: float, ell_k1: float) -> float:
    """A(I_k, I_{k+1}) for consecutive intervals meeting at a_k, by the
    endpoint form (l_k/sin l_k) sin(a_k - l_k) - (l_{k+1}/sin l_{k+1})
    sin(a_k + l_{k+1})."""
    if not (0.0 < ell_k < np.pi and 0.0 < ell_k1 < np.pi):
        raise InvalidInputError("interval lengths must lie in (0, pi)")
    return (ell_k / math.sin(ell_k) * math.sin(a_k - ell_k)
            - ell_k1 / math.sin(ell_k1) * math.sin(a_k + ell_k1))


def a_quantity_alt(a_k: float, ell_k: float, ell_k1: float) -> float:
    """Equivalent form (l_k/tan l_k - l_{k+1}/tan l_{k+1}) sin a_k
    - (l_k + l_{k+1}) cos a_k."""
    return ((ell_k / math.tan(ell_k) - ell_k1 / math.tan(ell_k1)) * math.sin(a_k)
            - (ell_k + ell_k1) * math.cos(a_k))


@dataclass(frozen=True)
class ThreeIntervalSystem:
    """The 3x3 linear system in (lambda0, m, lambda1) built from the relation
    on three consecutive interval pairs, for four alternating intervals
    (positive first).

    somme_factor and sommebis_factor are the two closed-form expressions for
    (lambda0 + m) divided by the common factor lambda1/2; they are None when
    the corresponding length difference vanishes (the expressions divide by
    sin((l_{k+2} - l_k)/2), resp. sin((l_{k+3} - l_{k+1})/2))."""

    matrix: np.ndarray
    det: float
    det_expansion: float
    somme_factor: float | None
    sommebis_factor: float | None


def three_interval_system(lengths, a_seed: float) -> ThreeIntervalSystem:
    """Assemble the system for lengths (l_k, .., l_{k+3}) with the first
    interval [a_seed, a_seed + l_k] positive.

    det_expansion evaluates the cofactor expansion identity along the third
    column; det == det_expansion up to rounding, and both vanish for equal
    alternating lengths (l_k = l_{k+2}, l_{k+1} = l_{k+3})."""
    l = np.asarray(lengths, dtype=float)
    if l.shape != (4,) or not np.all((l > 0) & (l < np.pi)):
        raise InvalidInputError("need four lengths in (0, pi)")
    ends = a_seed + np.concatenate([[0.0], np.cumsum(l)])
    A1 = a_quantity(ends[1], l[0], l[1])
    A2 = a_quantity(ends[2], l[1], l[2])
    A3 = a_quantity(ends[3], l[2], l[3])
    c = np.cos(l / 2)
    s01, t01 = math.sin((l[0] + l[1]) / 2), math.sin((l[1] - l[0]) / 2)
    s12, t12 = math.sin((l[1] + l[2]) / 2), math.sin((l[2] - l[1]) / 2)
    s23, t23 = math.sin((l[2] + l[3]) / 2), math.sin((l[3] - l[2]) / 2)
    matrix = np.array([
        [s01, -t01, -0.5 * c[0] * c[1] * A1],
        [s12, +t12, -0.5 * c[1] * c[2] * A2],
        [s23, -t23, -0.5 * c[2] * c[3] * A3],
    ])
    det = float(np.linalg.det(matrix))
    expansion = (A1 * c[0] * c[1] * math.sin(l[2]) * math.sin((l[1] - l[3]) / 2)
                 + A3 * c[2] * c[3] * math.sin(l[1]) * math.sin((l[2] - l[0]) / 2)
                 - A2 * c[1] * c[2]
                 * (math.sin((l[1] - l[3]) / 2) * math.sin((l[0] + l[2]) / 2)
                    + math.sin((l[2] - l[0]) / 2) * math.sin((l[1] + l[3]) / 2)))
    det_expansion = -0.5 * expansion

    d02 = math.sin((l[2] - l[0]) / 2)
    d13 = math.sin((l[3] - l[1]) / 2)
    somme = None
    if abs(d02) >= EQUAL_LENGTH_GUARD:
        somme = c[0] * c[2] * (A2 - A1) / d02
    sommebis = None
    if abs(d13) >= EQUAL_LENGTH_GUARD:
        sommebis = (c[2] * (math.cos(l[1] / 2) * math.sin(l[3] / 2) * A2
                            - math.cos(l[3] / 2) * math.sin(l[1] / 2) * A3)
                    / (math.sin(l[2] / 2) * d13))
    return ThreeIntervalSystem(matrix=matrix, det=det, det_expansion=det_expansion,
                               somme_factor=somme, sommebis_factor=sommebis)


def interval_system_residuals(lengths, a_seed: float,
                              mult: Multipliers) -> tuple[float, float]:
    """Cleared-denominator residuals of the two (lambda0 + m) expressions:

        r1 = (l0+m) sin((l_{k+2}-l_k)/2) - (l1/2) c_k c_{k+2} (A2 - A1)
        r2 = (l0+m) sin(l_{k+2}/2) sin((l_{k+3}-l_{k+1})/2)
             - (l1/2) c_{k+2} (cos(l_{k+1}/2) sin(l_{k+3}/2) A2
                               - cos(l_{k+3}/2) sin(l_{k+1}/2) A3)

    These are bounded combinations of the three interval relations, so they
    stay meaningful when the lengths are (nearly) equal and the ratio forms
    are flagged not-applicable."""
    l = np.asarray(lengths, dtype=float)
    ends = a_seed + np.concatenate([[0.0], np.cumsum(l)])
    A2 = a_quantity(ends[2], l[1], l[2])
    A1 = a_quantity(ends[1], l[0], l[1])
    A3 = a_quantity(ends[3], l[2], l[3])
    c = np.cos(l / 2)
    lm = mult.lambda0 + mult.m
    half = mult.lambda1 / 2.0
    r1 = lm * math.sin((l[2] - l[0]) / 2) - half * c[0] * c[2] * (A2 - A1)
    r2 = (lm * math.sin(l[2] / 2) * math.sin((l[3] - l[1]) / 2)
          - half * c[2] * (math.cos(l[1] / 2) * math.sin(l[3] / 2) * A2
                           - math.cos(l[3] / 2) * math.sin(l[1] / 2) * A3))
    return r1, r2


def multiplier_bound(mult: Multipliers, ell_minus: float) -> float:
    """Upper bound (2/l_-) sin(l_-/2) (m + lambda0) for |lambda1/2|, where
    l_- is the measure of the negative set."""
    if not 0.0 < ell_minus < TWO_PI:
        raise InvalidInputError("ell_minus must lie in (0, 2 pi)")
    return 2.0 / ell_minus * math.sin(ell_minus / 2) * (mult.m + mult.lambda0)
