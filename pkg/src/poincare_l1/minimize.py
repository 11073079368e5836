"""Projected subgradient descent for the quotient over truncated series.

The quotient J(u) = E(u)/L(u)^2 (E the coefficient-space energy, L the
exact L1 norm) is scale invariant, so every iterate is renormalized to
L = 1.  The descent direction combines the smooth energy gradient with the
L1 subgradient term:

    grad J = grad E - 2 J * g,     g_k = integral sgn(u) basis_k,

computed exactly between the refined zeros of the iterate (sgn(0) = 0; the
zero set is null for the iterates that matter, so the convention never
affects the integrals).  Backtracking line search with an Armijo condition
keeps accepted values monotone; a restart stops at the gradient tolerance,
the iteration cap, or when the backtracked step underflows (no descent step
exists at machine precision).

Baselines: over zero-mean series the quadratic quotient
integral u'^2 / integral u^2 has minimum min_k k^2 = 1; over the constrained
space, integral (u'^2 - u^2) / integral u^2 has minimum min_{k>=2}(k^2-1) = 3,
attained at the pure mode-2 series; Cauchy-Schwarz then bounds the L1
quotient below by 3/(2 pi).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .closed_form import closed_form_series
from .errors import DegenerateInputError, InvalidInputError
from .series import (
    FourierSeries,
    antiderivative_values,
    find_sign_changes,
    project_constraints,
    translate,
)

TWO_PI = 2.0 * np.pi

#: Armijo sufficient-decrease factor for the backtracking line search
ARMIJO_C1 = 1e-4

#: steps below this mean no descent exists at machine precision
STEP_UNDERFLOW = 1e-14


@dataclass(frozen=True)
class MinimizeOptions:
    max_mode: int = 256
    grid_size: int = 2048
    restarts: int = 8
    max_iters: int = 20000
    grad_tol: float = 1e-8
    step_shrink: float = 0.5
    seed: int = 0
    smooth_eps: float = 0.0
    keep_history: bool = False

    def __post_init__(self):
        if self.max_mode < 4:
            raise InvalidInputError("max_mode must be >= 4")
        if self.restarts < 1:
            raise InvalidInputError("restarts must be >= 1")
        if self.grad_tol <= 0:
            raise InvalidInputError("grad_tol must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise InvalidInputError("step_shrink must lie in (0, 1)")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be >= 1")
        if self.grid_size < 4 * self.max_mode:
            raise InvalidInputError("grid_size must be >= 4 * max_mode")


@dataclass(frozen=True)
class MinimizeResult:
    minimizer: FourierSeries
    value: float
    iterations: int
    restart_index: int
    converged: bool
    history: tuple[float, ...] | None = None


class _Objective:
    """J, L1 normalization and gradient for a fixed (max_mode, grid_size)."""

    def __init__(self, opts: MinimizeOptions):
        self.opts = opts
        k = np.arange(opts.max_mode + 1)
        self.k = k
        self.energy_weight = np.where(k >= 2, np.pi * (k * k - 1.0), 0.0)
        if opts.smooth_eps > 0.0:
            theta = -np.pi + TWO_PI * np.arange(opts.grid_size) / opts.grid_size
            kt = np.outer(theta, k)
            self._cos = np.cos(kt)
            self._sin = np.sin(kt)

    def energy(self, u: FourierSeries) -> float:
        return float(self.energy_weight @ (u.cos_coeffs ** 2 + u.sin_coeffs ** 2))

    def l1_and_subgrad(self, u: FourierSeries):
        """(L, g_cos, g_sin) with g the gradient of the L1 norm in
        coefficient space."""
        if self.opts.smooth_eps > 0.0:
            vals = self._cos @ u.cos_coeffs + self._sin @ u.sin_coeffs
            root = np.sqrt(vals * vals + self.opts.smooth_eps ** 2)
            w = TWO_PI / self.opts.grid_size
            L = w * float(np.sum(root))
            ratio = vals / root
            return L, w * (ratio @ self._cos), w * (ratio @ self._sin)
        zeros, signs = find_sign_changes(u, self.opts.grid_size)
        ends = np.concatenate([zeros, [zeros[0] + TWO_PI]])
        f = antiderivative_values(u, ends)
        L = float(np.sum(np.abs(np.diff(f))))
        kk = self.k[1:]
        skz = np.sin(np.outer(ends, kk))
        ckz = np.cos(np.outer(ends, kk))
        g_cos = np.concatenate([[signs @ np.diff(ends)],
                                (signs @ np.diff(skz, axis=0)) / kk])
        g_sin = np.concatenate([[0.0], (signs @ -np.diff(ckz, axis=0)) / kk])
        return L, g_cos, g_sin

    def l1(self, u: FourierSeries) -> float:
        if self.opts.smooth_eps > 0.0:
            return self.l1_and_subgrad(u)[0]
        zeros, _ = find_sign_changes(u, self.opts.grid_size)
        ends = np.concatenate([zeros, [zeros[0] + TWO_PI]])
        f = antiderivative_values(u, ends)
        return float(np.sum(np.abs(np.diff(f))))

    def normalized(self, u: FourierSeries) -> FourierSeries:
        L = self.l1(u)
        if L < 1e-12:
            raise DegenerateInputError("iterate has vanishing L1 norm")
        return u.scaled(1.0 / L)

    def value_and_grad(self, u: FourierSeries):
        """J and its coefficient-space gradient projected onto the
        constrained subspace; u is assumed normalized (L close to 1)."""
        E = self.energy(u)
        L, g_cos, g_sin = self.l1_and_subgrad(u)
        J = E / (L * L)
        gc = (2.0 * self.energy_weight * u.cos_coeffs - 2.0 * (E / L) * g_cos) / (L * L)
        gs = (2.0 * self.energy_weight * u.sin_coeffs - 2.0 * (E / L) * g_sin) / (L * L)
        gc[0] = gc[1] = gs[0] = gs[1] = 0.0
        return J, gc, gs

    def value(self, u: FourierSeries) -> float:
        E = self.energy(u)
        L = self.l1(u)
        return E / (L * L)


def _descend(start: FourierSeries, obj: _Objective):
    """One restart of backtracking subgradient descent from start."""
    opts = obj.opts
    u = obj.normalized(project_constraints(start))
    J, gc, gs = obj.value_and_grad(u)
    history = [J] if opts.keep_history else None
    step = 1.0
    iterations = 0
    converged = False
    for _ in range(opts.max_iters):
        gnorm2 = float(gc @ gc + gs @ gs)
        if np.sqrt(gnorm2) <= opts.grad_tol:
            converged = True
            break
        accepted = False
        while step >= STEP_UNDERFLOW:
            trial = FourierSeries(u.max_mode, u.cos_coeffs - step * gc,
                                  u.sin_coeffs - step * gs)
            try:
                # J is scale invariant: evaluate on the raw trial, rescale
                # only on acceptance
                L = obj.l1(trial)
                if L < 1e-12:
                    raise DegenerateInputError("vanishing L1 norm")
                Jt = obj.energy(trial) / (L * L)
            except DegenerateInputError:
                step *= opts.step_shrink
                continue
            if Jt <= J - ARMIJO_C1 * step * gnorm2:
                trial = trial.scaled(1.0 / L)
                accepted = True
                break
            step *= opts.step_shrink
        if not accepted:
            break
        u, J = trial, Jt
        iterations += 1
        if history is not None:
            history.append(J)
        J, gc, gs = obj.value_and_grad(u)
        step = min(step / opts.step_shrink, 1e3)
    return u, J, iterations, converged, history


def warm_start_series(opts: MinimizeOptions) -> FourierSeries:
    """Truncated exact-minimizer coefficients, randomly phase shifted."""
    rng = np.random.default_rng((opts.seed, 0))
    shift = rng.uniform(0.0, TWO_PI)
    return project_constraints(translate(closed_form_series(opts.max_mode), shift))


def random_start_series(opts: MinimizeOptions, index: int) -> FourierSeries:
    """Random coefficients with k^-2 standard deviation per mode, matching
    the decay class of the target well enough for basins."""
    rng = np.random.default_rng((opts.seed, index))
    k = np.arange(opts.max_mode + 1)
    sd = np.zeros(opts.max_mode + 1)
    sd[2:] = 1.0 / k[2:] ** 2
    cos = rng.normal(0.0, 1.0, opts.max_mode + 1) * sd
    sin = rng.normal(0.0, 1.0, opts.max_mode + 1) * sd
    sin[0] = 0.0
    return FourierSeries(opts.max_mode, cos, sin)


def _run_restart(opts: MinimizeOptions, index: int):
    obj = _Objective(opts)
    start = warm_start_series(opts) if index == 0 else random_start_series(opts, index)
    u, J, iterations, converged, history = _descend(start, obj)
    return index, u, J, iterations, converged, history


def _worker_count(n_runs: int) -> int:
    cap = os.environ.get("VARMIN_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_runs))


def minimize_rayleigh(opts: MinimizeOptions) -> MinimizeResult:
    """Best result over `restarts` random starts plus one warm start from the
    phase-shifted truncation of the exact minimizer (restart_index 0).

    Restarts are independent pure computations and run in parallel
    (VARMIN_THREADS caps the workers); results merge deterministically by
    (value, restart_index).  If no restart reaches the gradient tolerance
    the best iterate is returned with converged = False.
    """
    indices = list(range(opts.restarts + 1))
    workers = _worker_count(len(indices))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_restart, [opts] * len(indices), indices))
    else:
        outcomes = [_run_restart(opts, i) for i in indices]
    outcomes.sort(key=lambda r: (r[2], r[0]))
    index, u, J, iterations, converged, history = outcomes[0]
    return MinimizeResult(minimizer=u, value=J, iterations=iterations,
                          restart_index=index, converged=converged,
                          history=tuple(history) if history is not None else None)


def wirtinger_baseline(max_mode: int) -> float:
    """min over zero-mean truncated series of integral u'^2 / integral u^2,
    by the Parseval ratio: min_{1<=k<=N} k^2 = 1 exactly."""
    if max_mode < 1:
        raise InvalidInputError("max_mode must be >= 1")
    k = np.arange(1, max_mode + 1)
    return float(np.min(k * k))


def constrained_wirtinger_baseline(max_mode: int) -> float:
    """min over constrained series of integral (u'^2 - u^2) / integral u^2:
    min_{2<=k<=N} (k^2 - 1) = 3, attained at the pure mode-2 series."""
    if max_mode < 2:
        raise InvalidInputError("max_mode must be >= 2")
    k = np.arange(2, max_mode + 1)
    return float(np.min(k * k - 1))


def cauchy_schwarz_bound() -> float:
    """Lower bound 3/(2 pi) for the L1 quotient: (integral |u|)^2 <=
    2 pi integral u^2 combined with the constrained quadratic baseline."""
    return 3.0 / TWO_PI
