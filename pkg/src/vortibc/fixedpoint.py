"""Picard iteration to the Navier-Stokes solution u = v + w.

w carries the nonhomogeneous data through the Stokes problem; v is the
fixed point of the velocity map under homogeneous (absolute) boundary
conditions.  Convergence is measured in the sup-in-time N-norm: the
discrete counterpart of the solution-space norm, computed as the max over
snapshots of sqrt(||dv||_H2^2 + ||dv_t||_H1^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .elliptic import solve_pressure_linearized, solve_pressure_ns
from .errors import MaxIterExceeded, NoContraction
from .fields import (
    FieldHistory,
    ScalarField,
    VectorField,
    advect,
    boundary_scalar_values,
    curl2d,
    div,
    grad,
    h1,
    h2,
    l2,
    laplacian,
    normal_component,
)
from .geometry import boundary_frame
from .linearized import VelocityMapInput, apply_velocity_map
from .stokes import StokesRun, normalize_boundary_data, solve_stokes


@dataclass
class PicardConfig:
    """Stopping rule for the fixed-point iteration."""

    tol_fix: float = 1e-9
    max_iter: int = 12
    contraction_window: int = 3

    def __post_init__(self):
        if self.tol_fix <= 0:
            raise ValueError("tol_fix must be positive")
        if self.max_iter < 2:
            raise ValueError("max_iter must be at least 2")


@dataclass
class NSSolution:
    """Converged splitting u = v + w with pressure and convergence trace."""

    v: FieldHistory
    w: FieldHistory
    u: FieldHistory
    q: FieldHistory
    p: FieldHistory
    trace: list          # rows (iter, delta_WT, ratio) with ratio NaN at k=1
    mu: float
    dt: float
    u0: VectorField
    converged: bool = True


def wt_norm(diff: FieldHistory) -> float:
    """sup over snapshots of the N-norm of a history."""
    dt_hist = diff.time_derivative()
    worst = 0.0
    for k in range(len(diff)):
        val = np.sqrt(h2(diff[k]) ** 2 + h1(dt_hist[k]) ** 2)
        worst = max(worst, float(val))
    return worst


def _history_diff(a: FieldHistory, b: FieldHistory) -> FieldHistory:
    return FieldHistory(a.dt, [x - y for x, y in zip(a, b)], a.t0)


def _zero_history(grid, dt, count):
    return FieldHistory(dt, [VectorField.zeros(grid) for _ in range(count)])


def picard_solve(u0: VectorField, a, mu: float, T: float, dt: float,
                 cfg: PicardConfig, scheme: str = "backward-euler") -> NSSolution:
    """Iterate v <- V(v) from v = 0 until the W_T increment drops below
    tol_fix.

    Raises NoContraction when the increment ratio stays >= 1 over the
    configured window (the discrete shadow of the small-time requirement)
    and MaxIterExceeded at the iteration cap.
    """
    grid = u0.grid
    frame = boundary_frame(grid) if grid.has_boundary() else None

    if frame is not None:
        sample_a, _ = normalize_boundary_data(a, frame)
        om0 = boundary_scalar_values(curl2d(u0), frame)
        mism = max(float(np.max(np.abs(ob - av)))
                   for ob, av in zip(om0, sample_a(0.0)))
        scale = max(u0.max_abs(), 1.0)
        if mism > 50.0 * max(grid.h1, grid.h2) ** 2 * scale + 1e-12:
            warnings.warn(
                f"initial vorticity trace differs from a(0) by {mism:.3e}; "
                "the Stokes problem absorbs it in an initial layer")

    w_hist, q_hist, _ = solve_stokes(
        StokesRun(grid, mu, T, dt, u0, a, scheme=scheme))
    nt = len(w_hist)

    v_prev = _zero_history(grid, dt, nt)
    trace = []
    delta_prev = None
    bad_streak = 0
    for it in range(1, cfg.max_iter + 1):
        v_next = apply_velocity_map(
            VelocityMapInput(beta=v_prev, w=w_hist, mu=mu, dt=dt, T=T))
        delta = wt_norm(_history_diff(v_next, v_prev))
        ratio = float("nan") if delta_prev is None else (
            delta / delta_prev if delta_prev > 0 else 0.0)
        trace.append((it, delta, ratio))
        v_prev = v_next
        if delta <= cfg.tol_fix:
            break
        if delta_prev is not None and np.isfinite(ratio) and ratio >= 1.0:
            bad_streak += 1
            if bad_streak >= cfg.contraction_window:
                raise NoContraction(
                    f"increment ratio >= 1 for {bad_streak} consecutive "
                    f"iterations (last delta {delta:.3e}); reduce T")
        else:
            bad_streak = 0
        delta_prev = delta
    else:
        raise MaxIterExceeded(
            f"no fixed point within {cfg.max_iter} iterations "
            f"(last delta {trace[-1][1]:.3e})")

    v = v_prev
    u = FieldHistory(dt, [vk + wk for vk, wk in zip(v, w_hist)])
    p = FieldHistory(dt, [solve_pressure_linearized(vk, wk, frame)
                          for vk, wk in zip(v, w_hist)])
    return NSSolution(v=v, w=w_hist, u=u, q=q_hist, p=p, trace=trace,
                      mu=mu, dt=dt, u0=u0)


@dataclass
class IncompressibilityReport:
    times: np.ndarray
    div_l2: np.ndarray

    @property
    def max_div(self) -> float:
        return float(np.max(self.div_l2))


def verify_incompressibility(sol: NSSolution) -> IncompressibilityReport:
    """max_t ||div v(t)||_2: the divergence the fixed point recovered."""
    vals = np.array([l2(div(vk)) for vk in sol.v])
    return IncompressibilityReport(sol.v.times, vals)


@dataclass
class ResidualReport:
    interior_l2_max: float
    interior_l2: np.ndarray
    bc_perp_max: float
    bc_vorticity_max: float
    initial_l2: float


def ns_residual(sol: NSSolution, a, mu: float, frame) -> ResidualReport:
    """Momentum residual of u = v + w using the recovered pressure.

    Interior residual of du/dt + u.grad u + grad p - mu lap u with the
    pressure re-derived from u at each snapshot; boundary residuals report
    |u_perp| and |curl u - a|; the initial residual is ||u(0) - u0||_2.
    """
    grid = sol.u[0].grid
    u_t = sol.u.time_derivative()
    sample_a, _ = normalize_boundary_data(a, frame)
    interior = np.zeros(len(sol.u))
    mask = np.ones(grid.shape, dtype=bool)
    if grid.has_boundary():
        if grid.polar:
            mask[0, :] = mask[-1, :] = False
        elif not grid.periodic2:
            mask[:, 0] = mask[:, -1] = False
    w_int = grid.weights * mask

    bc_perp = 0.0
    bc_vort = 0.0
    for k in range(len(sol.u)):
        u = sol.u[k]
        p = solve_pressure_ns(u, sample_a(k * sol.dt), mu, frame)
        resid = u_t[k] + advect(u, u) + grad(p) - mu * laplacian(u)
        interior[k] = float(np.sqrt(np.sum(w_int * (resid.ux**2 + resid.uy**2))))
        if frame is not None:
            bc_perp = max(bc_perp, max(float(np.max(np.abs(vv)))
                                       for vv in normal_component(u, frame)))
            om_b = boundary_scalar_values(curl2d(u), frame)
            bc_vort = max(bc_vort, max(
                float(np.max(np.abs(ob - av)))
                for ob, av in zip(om_b, sample_a(k * sol.dt))))
    return ResidualReport(
        interior_l2_max=float(np.max(interior)),
        interior_l2=interior,
        bc_perp_max=bc_perp,
        bc_vorticity_max=bc_vort,
        initial_l2=l2(sol.u[0] - sol.u0),
    )


def compare_pressures(sol: NSSolution, a, mu: float, frame) -> float:
    """sup_t || p_ns(u) - (p_v + q) ||_2 after re-centering both to zero mean.

    p_ns is the single-field pressure of u; p_v + q is the split-path
    pressure from the fixed point plus the harmonic Stokes part.
    """
    grid = sol.u[0].grid
    sample_a, _ = normalize_boundary_data(a, frame)
    total_w = float(np.sum(grid.weights))
    worst = 0.0
    for k in range(len(sol.u)):
        p_direct = solve_pressure_ns(sol.u[k], sample_a(k * sol.dt), mu, frame)
        combo = sol.p[k].values + sol.q[k].values
        combo = combo - grid.integrate(combo) / total_w
        worst = max(worst, l2(p_direct - ScalarField(grid, combo)))
    return worst
