"""The velocity map: one pass of the linearized parabolic problem.

Given a transported field beta (absolute boundary conditions, vanishing at
t = 0) and the Stokes solution w, advance

    dv/dt + (beta + w) . grad (v + w) + grad p  =  mu lap v,

with v_perp = 0 and curl(v) = 0 on the boundary, v(0) = 0.  Diffusion is
implicit; advection and the pressure gradient are explicit at the old time
level.  The module also assembles the energy functional F(t) and the
exponential envelope check used as a regression on calibration scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import solve_divergence_coupling, solve_pressure_linearized
from .errors import CFLViolation
from .fields import (
    FieldHistory,
    VectorField,
    advect,
    curl2d,
    curl_scalar,
    div,
    grad,
    grad_l2,
    h1,
    h2,
    l2,
)
from .geometry import boundary_frame

CFL_LIMIT = 0.9


@dataclass
class VelocityMapInput:
    """Inputs for one application of the velocity map.

    beta and w share grid, dt, and snapshot count; beta[0] must vanish.
    v_init is the initial value of the evolving unknown (kept zero for the
    fixed-point iteration; exposed for superposition tests).
    """

    beta: FieldHistory
    w: FieldHistory
    mu: float
    dt: float
    T: float
    v_init: VectorField | None = None

    def __post_init__(self):
        if len(self.beta) != len(self.w):
            raise ValueError("beta and w must have the same snapshot count")
        if abs(self.beta.dt - self.w.dt) > 1e-14:
            raise ValueError("beta and w must share dt")
        if l2(self.beta[0]) > 1e-12 * max(1.0, l2(self.w[0])):
            raise ValueError("beta(0) must vanish")


def pair_n_norm_sq(hist: FieldHistory, hist_t: FieldHistory, k: int) -> float:
    """||f(t_k)||_N^2 = ||f||_H2^2 + ||f_t||_H1^2 for one history."""
    return h2(hist[k]) ** 2 + h1(hist_t[k]) ** 2


def apply_velocity_map(inp: VelocityMapInput) -> FieldHistory:
    """Advance the linearized problem; returns the v history.

    Raises CFLViolation when dt * max|beta + w| exceeds 0.9 of the finest
    cell spacing at any step.
    """
    from .stepping import VelocityStepper

    grid = inp.w[0].grid
    frame = boundary_frame(grid) if grid.has_boundary() else None
    stepper = VelocityStepper(grid, inp.mu, inp.dt, theta=1.0)
    nsteps = len(inp.w) - 1
    hmin = grid.min_spacing()

    v = inp.v_init.copy() if inp.v_init is not None else VectorField.zeros(grid)
    v_hist = FieldHistory(inp.dt, [v.copy()])
    a_zero = None
    if frame is not None:
        a_zero = [np.zeros(c.n_nodes) for c in frame]

    for n in range(nsteps):
        beta_n = inp.beta[n]
        w_n = inp.w[n]
        carrier = beta_n + w_n
        cfl = inp.dt * carrier.max_abs() / hmin
        if cfl > CFL_LIMIT:
            raise CFLViolation(
                f"advective CFL {cfl:.3f} > {CFL_LIMIT} at step {n}")
        p_n = solve_pressure_linearized(beta_n, w_n, frame)
        forcing = (advect(carrier, v + w_n) + grad(p_n)) * (-1.0)
        v = stepper.step(v, forcing, a_zero)
        v_hist.append(v.copy())
    return v_hist


@dataclass
class EnergyDiagnostics:
    """Time series of the energy functional and its components.

    F bundles ||(v, psi)||^2, ||(grad g, grad q)||^2 and the time-derivative
    block ||(v_t, d_t, omega_t)||^2; Q is the cumulative load integral
    int (1 + ||(beta, w)||_N^2) dt, nondecreasing by construction.
    """

    times: np.ndarray
    F: np.ndarray
    Q: np.ndarray
    comp_v_psi: np.ndarray
    comp_grad_gq: np.ndarray
    comp_time_derivs: np.ndarray
    load: np.ndarray  # 1 + ||(beta, w)(t)||_N^2

    def rows(self):
        for k in range(len(self.times)):
            yield (self.times[k], self.F[k], self.Q[k], self.comp_v_psi[k],
                   self.comp_grad_gq[k], self.comp_time_derivs[k])


F_COLUMNS = ("t", "F", "Q", "l2sq_v_psi", "l2sq_gradg_gradq", "l2sq_vt_dt_wt")


def compute_F(v_hist: FieldHistory, beta_hist: FieldHistory, w_hist: FieldHistory,
              mu: float, frame) -> EnergyDiagnostics:
    """Assemble F(t) and Q(t) from the computed histories.

    Needs at least 3 snapshots for interior-centered time derivatives.  The
    auxiliary scalar q couples the current v explicitly (same-step values).
    """
    if len(v_hist) < 3:
        raise ValueError("compute_F needs at least 3 snapshots")
    dt = v_hist.dt
    nt = len(v_hist)

    v_t = v_hist.time_derivative()
    beta_t = beta_hist.time_derivative()
    w_t = w_hist.time_derivative()

    d_hist = FieldHistory(dt, [div(v) for v in v_hist])
    om_hist = FieldHistory(dt, [curl2d(v) for v in v_hist])
    d_t = d_hist.time_derivative()
    om_t = om_hist.time_derivative()

    comp_v_psi = np.zeros(nt)
    comp_grad_gq = np.zeros(nt)
    comp_td = np.zeros(nt)
    load = np.zeros(nt)
    for k in range(nt):
        v = v_hist[k]
        psi = curl_scalar(om_hist[k])
        q = solve_divergence_coupling(beta_hist[k], w_hist[k], v, frame)
        gfield = d_hist[k] - q
        comp_v_psi[k] = l2(v) ** 2 + l2(psi) ** 2
        comp_grad_gq[k] = grad_l2(gfield) ** 2 + grad_l2(q) ** 2
        comp_td[k] = l2(v_t[k]) ** 2 + l2(d_t[k]) ** 2 + l2(om_t[k]) ** 2
        load[k] = (1.0 + pair_n_norm_sq(beta_hist, beta_t, k)
                   + pair_n_norm_sq(w_hist, w_t, k))

    F = comp_v_psi + comp_grad_gq + comp_td
    Q = np.zeros(nt)
    Q[1:] = np.cumsum(0.5 * dt * (load[1:] + load[:-1]))
    times = dt * np.arange(nt)
    return EnergyDiagnostics(times, F, Q, comp_v_psi, comp_grad_gq, comp_td, load)


def initial_energy_direct(u0: VectorField, frame) -> float:
    """Direct assembly of F(0): the squared norms of the initial momentum
    residual u0.grad(u0) + grad(p0) and of curl(u0.grad(u0))."""
    adv = advect(u0, u0)
    p0 = solve_pressure_linearized(VectorField.zeros(u0.grid), u0, frame)
    resid = adv + grad(p0)
    return l2(resid) ** 2 + l2(curl2d(adv)) ** 2


def gronwall_envelope(diag: EnergyDiagnostics, C1: float, C2: float) -> np.ndarray:
    """Pointwise envelope C1 e^{C2 Q(t)} (F(0) + int_0^t e^{-C2 Q} load^2 ds)."""
    dt = float(diag.times[1] - diag.times[0]) if len(diag.times) > 1 else 0.0
    integrand = np.exp(-C2 * diag.Q) * diag.load**2
    integral = np.zeros_like(integrand)
    if len(integrand) > 1:
        integral[1:] = np.cumsum(0.5 * dt * (integrand[1:] + integrand[:-1]))
    return C1 * np.exp(C2 * diag.Q) * (diag.F[0] + integral)


def check_gronwall_regression(diag: EnergyDiagnostics, C1: float, C2: float):
    """Frozen-constant envelope check: F(t) <= envelope at every snapshot.

    Returns (ok, max_ratio): the continuous constants are not constructive, so C1, C2
    come from a calibration run and act as regression values.
    """
    env = gronwall_envelope(diag, C1, C2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(env > 0, diag.F / env, np.inf)
        ratios[diag.F == 0] = 0.0
    max_ratio = float(np.max(ratios))
    return bool(np.all(diag.F <= env)), max_ratio
