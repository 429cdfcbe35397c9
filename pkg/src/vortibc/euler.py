"""Inviscid reference solver and the vanishing-viscosity sweep harness.

The Euler solver transports vorticity with RK2 and centered advection and
recovers velocity from a streamfunction that is constant on each boundary
component; on multiply connected domains the free constants are pinned by
conserved circulations (channel: conserved through-flux).  The sweep
compares viscous solutions against the inviscid one as viscosity decreases
and reports the fitted convergence slope together with a discretization
noise floor.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass

import numpy as np

from .elliptic import NeumannProblem, _data_scale, _pressure_tol, solve_dirichlet, solve_neumann
from .errors import CFLViolation, CirculationSystemSingular
from .fields import (
    FieldHistory,
    ScalarField,
    VectorField,
    _dx_dy,
    curl2d,
    grad_l2,
    l2,
    tangential_part,
)
from .geometry import DomainKind, Grid, boundary_frame, surface_integrate

log = logging.getLogger(__name__)

CFL_LIMIT = 0.9


def _advect_scalar(u: VectorField, f: ScalarField) -> np.ndarray:
    fx, fy = _dx_dy(f.grid, f.values)
    return u.ux * fx + u.uy * fy


def _rotgrad(grid, s_values) -> VectorField:
    sx, sy = _dx_dy(grid, s_values)
    return VectorField(grid, sy, -sx)


class StreamfunctionSolver:
    """Velocity recovery u = rot(grad s) from vorticity, with the boundary
    constants fixed by conserved circulations / through-flux."""

    def __init__(self, grid: Grid, u0: VectorField):
        self.grid = grid
        self.kind = grid.spec.kind
        if self.kind == DomainKind.TORUS:
            total_w = float(np.sum(grid.weights))
            self.mean_u = (grid.integrate(u0.ux) / total_w,
                           grid.integrate(u0.uy) / total_w)
        elif self.kind == DomainKind.CHANNEL:
            # conserved through-flux sets s(top) - s(bottom)
            self.flux = grid.integrate(u0.ux) / grid.spec.length_x
        else:
            frame = boundary_frame(grid)
            inner = frame.components[0]
            tang = tangential_part(u0, frame)[0]
            self.target_circulation = float(np.sum(inner.ds * tang))
            # harmonic basis: 1 on the inner circle, 0 on the outer
            s1 = solve_dirichlet(grid, np.zeros(grid.shape), 1.0, 0.0)
            self.s1 = s1
            self.gamma1 = self._circulation(s1)
            if abs(self.gamma1) < 1e-12:
                raise CirculationSystemSingular(
                    "harmonic basis carries no circulation")

    def _circulation(self, s_values):
        # circulation along the inner component: oint <u, tau> dS = oint dr s dS,
        # with the same end stencil the velocity reconstruction uses so the
        # enforced and measured circulations agree to solver tolerance
        g = self.grid
        h = g.h1
        drs = (-4.0 * s_values[0, :] + 7.0 * s_values[1, :]
               - 4.0 * s_values[2, :] + s_values[3, :]) / (2.0 * h)
        r0 = float(g.c1[0])
        return float(np.sum(drs) * r0 * g.h2)

    def velocity(self, omega: ScalarField) -> VectorField:
        g = self.grid
        if self.kind == DomainKind.TORUS:
            # curl fields sum to zero exactly; transported states pick up an
            # O(h^2) mean that the repair path absorbs.
            src = ScalarField(g, -omega.values)
            tol = _pressure_tol(g, _data_scale(g, None, src.values, []))
            s = solve_neumann(NeumannProblem(g, src, [], tol_compat=tol))
            u = _rotgrad(g, s.values)
            return VectorField(g, u.ux + self.mean_u[0], u.uy + self.mean_u[1])
        if self.kind == DomainKind.CHANNEL:
            s = solve_dirichlet(g, -omega.values, 0.0, self.flux)
            return _rotgrad(g, s)
        s0 = solve_dirichlet(g, -omega.values, 0.0, 0.0)
        c = (self.target_circulation - self._circulation(s0)) / self.gamma1
        return _rotgrad(g, s0 + c * self.s1)


def solve_euler(u0: VectorField, T: float, dt: float, grid: Grid,
                frame=None) -> FieldHistory:
    """Vorticity-transport Euler solve; returns the velocity history.

    RK2 (Heun) in time, centered advection in space; raises CFLViolation
    when dt * max|u| exceeds 0.9 of the finest spacing.
    """
    del frame  # geometry is reconstructed from the grid
    solver = StreamfunctionSolver(grid, u0)
    hmin = grid.min_spacing()
    omega = curl2d(u0)
    u = solver.velocity(omega)
    hist = FieldHistory(dt, [u.copy()])
    nsteps = int(round(T / dt))
    for n in range(nsteps):
        if dt * u.max_abs() / hmin > CFL_LIMIT:
            raise CFLViolation(f"Euler advective CFL exceeded at step {n}")
        k1 = _advect_scalar(u, omega)
        om1 = ScalarField(grid, omega.values - dt * k1)
        u1 = solver.velocity(om1)
        k2 = _advect_scalar(u1, om1)
        omega = ScalarField(grid, omega.values - 0.5 * dt * (k1 + k2))
        u = solver.velocity(omega)
        hist.append(u.copy())
    return hist


def kinetic_energy(u: VectorField) -> float:
    return 0.5 * l2(u) ** 2


def circulation(u: VectorField, component) -> float:
    tang = (u.ux[component.index, :] * component.tau[:, 0]
            + u.uy[component.index, :] * component.tau[:, 1]) \
        if component.axis == 0 else \
           (u.ux[:, component.index] * component.tau[:, 0]
            + u.uy[:, component.index] * component.tau[:, 1])
    return float(np.sum(component.ds * tang))


# ---------------------------------------------------------------------------
# viscosity sweep

@dataclass
class SweepConfig:
    """Shared discretization for a decreasing-viscosity comparison."""

    mu_list: list
    u0: VectorField
    a: object
    T: float
    dt: float
    grid: Grid
    tol_fix: float = 1e-7
    max_iter: int = 20

    def __post_init__(self):
        mus = list(self.mu_list)
        if len(mus) < 1:
            raise ValueError("mu_list must be non-empty")
        if any(b >= a for a, b in zip(mus, mus[1:])):
            raise ValueError("mu_list must be strictly decreasing")


@dataclass
class SweepRow:
    mu: float
    e_sup: float
    e_grad: float
    noise_floor: float
    converged: bool


@dataclass
class SweepReport:
    rows: list
    slope: float | None          # least-squares slope of log e_sup vs log mu
    slope_note: str
    e_grad_ratio: float | None   # max/min across converged rows
    partial: bool = False

    def csv_rows(self):
        return [(r.mu, r.e_sup, r.e_grad, r.noise_floor, int(r.converged))
                for r in self.rows]


SWEEP_COLUMNS = ("mu", "e_sup", "e_grad", "noise_floor", "converged")


def _run_single_mu(cfg, mu, euler_hist):
    from .fixedpoint import PicardConfig, picard_solve

    sol = picard_solve(cfg.u0, cfg.a, mu, cfg.T, cfg.dt,
                       PicardConfig(tol_fix=cfg.tol_fix, max_iter=cfg.max_iter))
    e_sup = 0.0
    e_grad_series = np.zeros(len(sol.u))
    for k in range(len(sol.u)):
        diff = sol.u[k] - euler_hist[k]
        e_sup = max(e_sup, l2(diff))
        e_grad_series[k] = grad_l2(diff) ** 2
    e_grad = float(np.trapezoid(e_grad_series, dx=cfg.dt))
    return e_sup, e_grad


def sweep_mu(cfg: SweepConfig) -> SweepReport:
    """Run the viscous runs against the shared Euler reference.

    Per-viscosity failures are tolerated: completed rows are reported and
    the report is marked partial.  The row table is assembled in mu order
    regardless of execution order, so output is deterministic.
    """
    grid = cfg.grid
    euler_hist = solve_euler(cfg.u0, cfg.T, cfg.dt, grid)
    noise_floor = 10.0 * (grid.min_spacing() ** 2 + cfg.dt)

    results = {}
    threads = int(os.environ.get("VORTIBC_THREADS", "1") or "1")
    mus = list(cfg.mu_list)
    if threads > 1 and len(mus) > 1:
        from concurrent.futures import ThreadPoolExecutor

        def job(mu):
            try:
                return mu, _run_single_mu(cfg, mu, euler_hist), None
            except Exception as exc:  # noqa: BLE001 - report per-mu failures
                return mu, None, exc

        with ThreadPoolExecutor(max_workers=threads) as ex:
            for mu, res, exc in ex.map(job, mus):
                results[mu] = (res, exc)
    else:
        for mu in mus:
            try:
                results[mu] = (_run_single_mu(cfg, mu, euler_hist), None)
            except Exception as exc:  # noqa: BLE001
                results[mu] = (None, exc)

    rows = []
    failures = 0
    for mu in mus:
        res, exc = results[mu]
        if exc is not None:
            log.warning("sweep mu=%.3e failed: %s", mu, exc)
            rows.append(SweepRow(mu, float("nan"), float("nan"), noise_floor, False))
            failures += 1
        else:
            e_sup, e_grad = res
            rows.append(SweepRow(mu, e_sup, e_grad, noise_floor, True))

    good = [r for r in rows if r.converged]
    slope = None
    slope_note = "n/a"
    if len(good) >= 2:
        xs = np.log([r.mu for r in good])
        ys = np.log([max(r.e_sup, 1e-300) for r in good])
        slope = float(np.polyfit(xs, ys, 1)[0])
        below = [r for r in good if r.e_sup < r.noise_floor]
        slope_note = "noise floor" if below else "ok"
    e_grad_ratio = None
    if good:
        vals = [r.e_grad for r in good if r.e_grad > 0]
        if vals:
            e_grad_ratio = float(max(vals) / min(vals))
    return SweepReport(rows=rows, slope=slope, slope_note=slope_note,
                       e_grad_ratio=e_grad_ratio, partial=failures > 0)


# ---------------------------------------------------------------------------
# viscous-difference differential inequality (regression form)

@dataclass
class ViscousGronwallReport:
    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def ok(self) -> bool:
        return bool(np.all(self.lhs <= self.rhs))

    @property
    def max_excess(self) -> float:
        return float(np.max(self.lhs - self.rhs))


def check_gronwall_viscous(u_mu_hist: FieldHistory, u_hist: FieldHistory, a,
                           mu: float, mu0: float, frame, C: float,
                           include_mu_term: bool = True) -> ViscousGronwallReport:
    """Discrete form of the energy inequality for v = u_mu - u:

        d/dt ||v||^2 + mu ||grad v||^2
            <= C ((|grad u|_inf + mu0) ||v||^2
                  + mu (||a||^2_{L2(Gamma)} + ||u||^2_H2)),

    with a frozen regression constant C.  Interior snapshots only (centered
    time differences).  `include_mu_term=False` drops the mu-proportional
    forcing for sensitivity experiments.
    """
    from .fields import h2 as h2_norm
    from .stokes import normalize_boundary_data

    dt = u_hist.dt
    nt = len(u_hist)
    diffs = [um - ue for um, ue in zip(u_mu_hist, u_hist)]
    vsq = np.array([l2(d) ** 2 for d in diffs])
    sample_a, _ = normalize_boundary_data(a, frame)

    times, lhs_list, rhs_list = [], [], []
    for k in range(1, nt - 1):
        dvdt = (vsq[k + 1] - vsq[k - 1]) / (2.0 * dt)
        lhs = dvdt + mu * grad_l2(diffs[k]) ** 2
        u = u_hist[k]
        ux_x, ux_y = _dx_dy(u.grid, u.ux)
        uy_x, uy_y = _dx_dy(u.grid, u.uy)
        grad_inf = max(float(np.max(np.abs(g)))
                       for g in (ux_x, ux_y, uy_x, uy_y))
        forcing = 0.0
        if include_mu_term:
            a_sq = 0.0
            if frame is not None:
                a_k = sample_a(k * dt)
                a_sq = surface_integrate(frame, [av * av for av in a_k])
            forcing = mu * (a_sq + h2_norm(u) ** 2)
        rhs = C * ((grad_inf + mu0) * vsq[k] + forcing)
        times.append(k * dt)
        lhs_list.append(lhs)
        rhs_list.append(rhs)
    return ViscousGronwallReport(np.array(times), np.array(lhs_list),
                                 np.array(rhs_list))
