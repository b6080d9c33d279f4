"""Constructive computation of layer profiles: box-constrained projected
gradient descent on truncated domains, continuation in the truncation radius
and the regularization weight, and the energy-growth diagnostics.

The stage energy is the discrete quadratic form built from the *same* offset
weights as the quadrature operator, so the gradient of the stage energy is
exactly h * (L_delta u + W'(u)) and Armijo descent is meaningful down to
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import GridFunction, Potential, SpectralMeasure, phi
from .energy import total_energy
from .operator import OperatorSpec, apply_L, quadrature_weights


class DescentError(RuntimeError):
    """Energy increased between accepted iterates."""


@dataclass(frozen=True)
class SolverConfig:
    """Continuation schedules and descent parameters.

    delta_schedule is descending and may end at 0; R_schedule is ascending.
    When the schedules have different lengths the shorter one keeps its last
    value.  step = 0 picks 1/(spectral bound) automatically per stage.
    h_target fixes the grid resolution; every stage grid is odd-sized so the
    origin is a node.
    """

    delta_schedule: tuple[float, ...]
    R_schedule: tuple[float, ...]
    step: float = 0.0
    tol: float = 1e-4
    max_iters: int = 40000
    h_target: float = 0.05
    projection_box: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if not self.delta_schedule or not self.R_schedule:
            raise ValueError("schedules must be nonempty")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")
        if self.step < 0.0:
            raise ValueError("step must be nonnegative")
        if list(self.delta_schedule) != sorted(self.delta_schedule, reverse=True):
            raise ValueError("delta_schedule must be descending")
        if list(self.R_schedule) != sorted(self.R_schedule):
            raise ValueError("R_schedule must be ascending")
        if self.projection_box != (-1.0, 1.0):
            raise ValueError("profiles are clamped to [-1, 1]")


@dataclass(frozen=True)
class StageRecord:
    R: float
    delta: float
    iterations: int
    energy: float
    grad_norm: float
    monotone_defect: float
    odd_defect: float
    converged: bool
    flat: bool


@dataclass(frozen=True)
class LayerProfile:
    """Converged (or best-effort) profile with its a-posteriori diagnostics."""

    u: GridFunction
    residual: float
    monotone_defect: float
    odd_defect: float
    limits: tuple[float, float]
    converged: bool
    iterations: int
    second_diff_sup: float
    stages: tuple[StageRecord, ...] = ()
    history: tuple[tuple[int, float, float], ...] = ()  # (iter, energy, grad_norm)


def _stage_grid(R: float, h_target: float) -> tuple[int, float]:
    half = max(8, int(round(R / h_target)))
    n = 2 * half + 1
    h = 2.0 * R / (n - 1)
    return n, h


class _StageProblem:
    """Discrete energy and gradient for one (R, delta) stage."""

    def __init__(self, m: SpectralMeasure, p: Potential, delta: float, R: float, n: int):
        self.m = m
        self.p = p
        self.delta = delta
        self.R = R
        self.n = n
        self.h = 2.0 * R / (n - 1)
        self.atom_weights = []
        for s, w in m.atoms:
            a, a_far = quadrature_weights(n, self.h, s)
            suffix = np.zeros(a.shape[0] + 1)
            suffix[:-1] = np.cumsum(a[::-1])[::-1]
            self.atom_weights.append((s, w, a, a_far, suffix))
        # effective classical weight: the regularization plus the measure's
        # mass at s = 1
        self.lap_coef = delta + (1.0 - delta) * m.lap_mass
        self.frac_coef = 1.0 - delta

    def gradient(self, u: np.ndarray) -> np.ndarray:
        """L_delta u + W'(u) on the nodes (the energy gradient divided by h)."""
        n, h = self.n, self.h
        out = self.p.dw(u).astype(float)
        if self.lap_coef > 0.0:
            left = np.concatenate(([-1.0], u[:-1]))
            right = np.concatenate((u[1:], [1.0]))
            out += self.lap_coef * (2.0 * u - left - right) / (h * h)
        if self.frac_coef > 0.0 and self.atom_weights:
            u_ext = np.concatenate((np.full(n - 1, -1.0), u, np.full(n - 1, 1.0)))
            for s, w, a, a_far, _ in self.atom_weights:
                vals = _kernels.apply_offsets(u_ext, n, a)
                vals += a_far * (2.0 * u)  # tails contribute -(-1) - (+1) = 0
                out += self.frac_coef * w * vals
        return out

    def energy(self, u: np.ndarray) -> float:
        n, h = self.n, self.h
        total = h * float(np.sum(self.p.w(u)))
        if self.lap_coef > 0.0:
            d = np.diff(u)
            total += self.lap_coef * 0.5 * float(np.dot(d, d)) / h
        if self.frac_coef > 0.0:
            for s, w, a, a_far, suffix in self.atom_weights:
                pair = _kernels.pair_energy(u, a)
                idx = np.arange(n)
                sl = suffix[np.minimum(idx + 1, n - 1)]
                sr = suffix[np.minimum(n - idx, n - 1)]
                left_t = float(np.sum(sl * (u + 1.0) ** 2))
                right_t = float(np.sum(sr * (u - 1.0) ** 2))
                far_t = a_far * float(np.sum((u + 1.0) ** 2 + (u - 1.0) ** 2))
                total += self.frac_coef * w * (h / 2.0) * (pair + left_t + right_t + far_t)
        return total

    def step_bound(self) -> float:
        lam = 0.0
        if self.lap_coef > 0.0:
            lam += self.lap_coef * 4.0 / self.h**2
        for s, w, a, a_far, _ in self.atom_weights:
            lam += self.frac_coef * w * 4.0 * (float(np.sum(np.abs(a))) + a_far)
        t = np.linspace(-1.0, 1.0, 201)
        lam += float(np.max(np.abs(self.p.d2w(t))))
        return 1.0 / lam


def _projected_gradient_norm(u: np.ndarray, g: np.ndarray) -> float:
    pg = g.copy()
    pg[0] = 0.0
    pg[-1] = 0.0
    upper = (u >= 1.0 - 1e-14) & (g < 0.0)
    lower = (u <= -1.0 + 1e-14) & (g > 0.0)
    pg[upper] = 0.0
    pg[lower] = 0.0
    return float(np.max(np.abs(pg)))


def sliding_check(u: GridFunction) -> tuple[float, float]:
    """(monotone_defect, odd_defect) of a 1-D profile.

    monotone_defect is the magnitude of the most negative forward difference
    (zero for nondecreasing data); odd_defect is sup |u(x) + u(-x)|.
    """
    if u.dim != 1:
        raise ValueError("sliding diagnostics are one-dimensional")
    d = np.diff(u.values)
    monotone = float(max(0.0, -np.min(d)))
    odd = float(np.max(np.abs(u.values + u.values[::-1])))
    return monotone, odd


def solve_truncated(
    m: SpectralMeasure,
    p: Potential,
    delta: float,
    R: float,
    init: GridFunction,
    step: float = 0.0,
    tol: float = 1e-4,
    max_iters: int = 40000,
    log_every: int = 25,
) -> LayerProfile:
    """Minimize the truncated stage energy with clamped projected gradient
    descent; exterior values are pinned to -1 / +1 exactly.

    Non-convergence within max_iters returns the best iterate flagged
    unconverged; an energy increase between accepted iterates raises
    DescentError.
    """
    if init.dim != 1:
        raise ValueError("1-D solver")
    if np.max(np.abs(init.values)) > 1.0 + 1e-12:
        raise ValueError("init must satisfy |u| <= 1")
    n = init.n
    prob = _StageProblem(m, p, delta, R, n)
    u = np.clip(init.values.copy(), -1.0, 1.0)
    u[0], u[-1] = -1.0, 1.0
    tau0 = step if step > 0.0 else prob.step_bound()
    tau = tau0
    e_prev = prob.energy(u)
    history = []
    converged = False
    flat = False
    flat_run = 0
    it = 0
    g = prob.gradient(u)
    while it < max_iters:
        pgn = _projected_gradient_norm(u, g)
        if it % log_every == 0:
            history.append((it, e_prev, pgn))
        if pgn <= tol:
            converged = True
            break
        accepted = False
        for _ in range(60):
            trial = u - tau * g
            trial[0], trial[-1] = -1.0, 1.0
            np.clip(trial, -1.0, 1.0, out=trial)
            e_trial = prob.energy(trial)
            dsq = float(np.dot(trial - u, trial - u))
            if e_trial <= e_prev - 1e-4 * dsq / max(tau, 1e-300):
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            flat = True
            break
        if e_trial > e_prev + 1e-12 * max(1.0, abs(e_prev)):
            raise DescentError(f"energy rose from {e_prev!r} to {e_trial!r}")
        if e_prev - e_trial < 1e-14 * max(1.0, abs(e_prev)):
            flat_run += 1
            if flat_run >= 50:
                flat = True
                it += 1
                u = trial
                e_prev = e_trial
                g = prob.gradient(u)
                break
        else:
            flat_run = 0
        u = trial
        e_prev = e_trial
        tau = min(tau * 1.25, 8.0 * tau0)
        g = prob.gradient(u)
        it += 1
    pgn = _projected_gradient_norm(u, g)
    history.append((it, e_prev, pgn))
    grid = GridFunction(1, R, n, u, "layer")
    return _finalize_profile(grid, m, p, delta, converged or (flat and pgn <= 10 * tol), it, history)


def _finalize_profile(
    grid: GridFunction,
    m: SpectralMeasure,
    p: Potential,
    delta: float,
    converged: bool,
    iterations: int,
    history,
    stages: tuple = (),
) -> LayerProfile:
    spec = OperatorSpec(measure=m, delta=delta, backend="quadrature")
    lu = apply_L(spec, grid).values
    resid = lu + p.dw(grid.values)
    residual = float(np.max(np.abs(resid[1:-1])))
    monotone, odd = sliding_check(grid)
    # second differences away from the pinned ends: the truncated problem
    # develops a dist^s cusp at the boundary that is an artifact of the
    # pinning, not of the profile's interior smoothness
    inner = np.abs(grid.x) <= grid.X - 2.0
    d2_full = np.abs(np.diff(grid.values, 2)) / grid.h**2
    d2 = d2_full[inner[1:-1]]
    return LayerProfile(
        u=grid,
        residual=residual,
        monotone_defect=monotone,
        odd_defect=odd,
        limits=(float(grid.values[0]), float(grid.values[-1])),
        converged=converged,
        iterations=iterations,
        second_diff_sup=float(np.max(d2)) if d2.size else 0.0,
        stages=stages,
        history=tuple(history),
    )


def continuation_solve(cfg: SolverConfig, m: SpectralMeasure, p: Potential) -> LayerProfile:
    """Run solve_truncated along the (R, delta) schedules with warm starts.

    Each stage is interpolated onto the next grid (tails pinned); the final
    profile carries the per-stage diagnostic records.
    """
    n_stages = max(len(cfg.R_schedule), len(cfg.delta_schedule))
    records = []
    profile = None
    total_iters = 0
    for k in range(n_stages):
        R = cfg.R_schedule[min(k, len(cfg.R_schedule) - 1)]
        delta = cfg.delta_schedule[min(k, len(cfg.delta_schedule) - 1)]
        n, h = _stage_grid(R, cfg.h_target)
        x = np.linspace(-R, R, n)
        if profile is None:
            init_vals = np.clip(x / R, -1.0, 1.0)
        else:
            init_vals = np.interp(x, profile.u.x, profile.u.values, left=-1.0, right=1.0)
        init_vals[0], init_vals[-1] = -1.0, 1.0
        init = GridFunction(1, R, n, init_vals, "layer")
        profile = solve_truncated(m, p, delta, R, init, step=cfg.step, tol=cfg.tol, max_iters=cfg.max_iters)
        total_iters += profile.iterations
        records.append(
            StageRecord(
                R=R,
                delta=delta,
                iterations=profile.iterations,
                energy=profile.history[-1][1],
                grad_norm=profile.history[-1][2],
                monotone_defect=profile.monotone_defect,
                odd_defect=profile.odd_defect,
                converged=profile.converged,
                flat=False,
            )
        )
        if not profile.converged:
            raise RuntimeError(f"stage {k} (R={R}, delta={delta}) failed to converge")
    final_delta = cfg.delta_schedule[-1] if len(cfg.delta_schedule) <= n_stages else cfg.delta_schedule[n_stages - 1]
    return _finalize_profile(
        profile.u, m, p, final_delta, profile.converged, total_iters, list(profile.history), tuple(records)
    )


def competitor_energy_test(
    m: SpectralMeasure, p: Potential, R: float, h_target: float = 0.02
) -> tuple[float, float]:
    """Energy comparison behind the far-field limits argument.

    Returns (E_trivial_lower, E_competitor): the linear-in-R lower bound
    2 R W(0) a profile stuck at the well-less level would pay, and the energy
    of max(0, psi) with psi the explicit unit-slope trapezoid profile, which
    grows strictly slower than R.
    """
    if R < 4.0:
        raise ValueError("competitor comparison needs R >= 4")
    X = R + 2.0
    half = int(round(X / h_target))
    n = 2 * half + 1
    x = np.linspace(-X, X, n)
    psi = np.minimum(1.0, R - 1.0 - np.abs(x))
    w = np.maximum(0.0, psi)
    grid = GridFunction(1, X, n, w, "zero")
    eb = total_energy(grid, m, p, R)
    e_lower = 2.0 * R * float(p.w(0.0))
    return e_lower, eb.total


@dataclass(frozen=True)
class ScanRow:
    R: float
    energy: float
    phi_ref: float
    ratio: float


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    s_hat: float
    ratio_spread: float  # max ratio / min ratio across the sweep


def fit_phi_family(R_values, energies, s_grid=None) -> float:
    """Least-squares fit of E(R) ~ beta + alpha * Phi_{1,s}(R); returns the
    best s.

    The growth family interpolates R^(1-2s), log R, and bounded behavior, and
    the affine offset absorbs the core energy, so the fitted s identifies the
    scaling regime of an energy sweep.
    """
    R_values = np.asarray(R_values, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if np.any(energies <= 0.0):
        raise ValueError("energies must be positive for the growth fit")
    if s_grid is None:
        s_grid = np.linspace(0.05, 0.999, 950)
    best_s, best_cost = None, np.inf
    ones = np.ones_like(R_values)
    for s in s_grid:
        col = np.array([phi(1, s, R) for R in R_values])
        design = np.column_stack((ones, col))
        coef, _, _, _ = np.linalg.lstsq(design, energies, rcond=None)
        if coef[1] < 0.0:
            continue
        resid = energies - design @ coef
        cost = float(np.dot(resid, resid))
        if cost < best_cost:
            best_cost, best_s = cost, float(s)
    return best_s


def energy_scaling_scan(
    profile: LayerProfile, m: SpectralMeasure, p: Potential, R_list
) -> ScanResult:
    """Energies of a converged profile over growing balls against the growth
    benchmark; the ratio column is E / Phi_{1, s_star}(R)."""
    u = profile.u
    rows = []
    for R in R_list:
        if R > u.X - 2.0:
            raise ValueError(f"R={R} exceeds the profile box minus margin")
        eb = total_energy(u, m, p, R)
        rows.append(ScanRow(R=float(R), energy=eb.total, phi_ref=eb.phi_ref, ratio=eb.total / eb.phi_ref))
    ratios = [r.ratio for r in rows]
    s_hat = fit_phi_family([r.R for r in rows], [r.energy for r in rows])
    return ScanResult(rows=tuple(rows), s_hat=s_hat, ratio_spread=max(ratios) / min(ratios))
