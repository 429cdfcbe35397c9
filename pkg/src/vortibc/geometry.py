"""Curved 2D computational domains: structured grids and analytic boundary frames.

Supported domain families: annulus, disk (annulus with a small artificial
pole hole), periodic channel, and fully periodic torus.  All boundary-frame
quantities (normal, tangent, curvature, arc-length weights) are analytic per
family; nothing is estimated numerically from the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidSpec, NoBoundary, ResolutionTooLow


class DomainKind(str, Enum):
    ANNULUS = "annulus"
    DISK = "disk"
    CHANNEL = "channel"
    TORUS = "torus"


@dataclass(frozen=True)
class DomainSpec:
    """Geometric description of a computational domain.

    Annulus uses (r_inner, r_outer); disk uses r_outer; channel and torus
    use (length_x, length_y).  The channel is periodic in x with flat walls
    at y = 0 and y = length_y; the torus is periodic in both directions.
    """

    kind: DomainKind
    r_inner: float = 0.0
    r_outer: float = 0.0
    length_x: float = 0.0
    length_y: float = 0.0

    def __post_init__(self):
        k = self.kind
        if k == DomainKind.ANNULUS:
            if not (0.0 < self.r_inner < self.r_outer):
                raise InvalidSpec(
                    f"annulus requires 0 < r_inner < r_outer, got "
                    f"({self.r_inner}, {self.r_outer})"
                )
        elif k == DomainKind.DISK:
            if not self.r_outer > 0.0:
                raise InvalidSpec(f"disk requires r_outer > 0, got {self.r_outer}")
        elif k in (DomainKind.CHANNEL, DomainKind.TORUS):
            if not (self.length_x > 0.0 and self.length_y > 0.0):
                raise InvalidSpec(
                    f"{k.value} requires positive lengths, got "
                    f"({self.length_x}, {self.length_y})"
                )
        else:  # pragma: no cover
            raise InvalidSpec(f"unknown domain kind {k!r}")

    @property
    def polar(self) -> bool:
        return self.kind in (DomainKind.ANNULUS, DomainKind.DISK)

    def area(self) -> float:
        """Analytic area of the continuous domain (disk includes the pole)."""
        if self.kind == DomainKind.ANNULUS:
            return math.pi * (self.r_outer**2 - self.r_inner**2)
        if self.kind == DomainKind.DISK:
            return math.pi * self.r_outer**2
        return self.length_x * self.length_y


class Grid:
    """Structured grid over a DomainSpec.

    Node layout is deterministic with coordinate 2 fastest: a field array has
    shape (n1, n2) and flattens in C order.  Coordinate 1 is radial for polar
    domains and x for channel/torus; coordinate 2 is angular respectively y.
    Periodic directions wrap with no duplicated seam node.  Quadrature
    weights include the polar Jacobian r.  Instances are immutable after
    construction and safe to share across threads.
    """

    def __init__(self, spec: DomainSpec, n1: int, n2: int):
        if n1 < 8 or n2 < 8:
            raise ResolutionTooLow(f"need n1, n2 >= 8, got ({n1}, {n2})")
        self.spec = spec
        self.n1 = int(n1)
        self.n2 = int(n2)

        kind = spec.kind
        if kind in (DomainKind.ANNULUS, DomainKind.DISK):
            if kind == DomainKind.ANNULUS:
                r_in, r_out = spec.r_inner, spec.r_outer
            else:
                # Pole hole of radius exactly 2*h1: r_in = 2 R / (n1 + 1).
                r_out = spec.r_outer
                r_in = 2.0 * r_out / (n1 + 1)
            self.c1 = np.linspace(r_in, r_out, n1)
            self.h1 = (r_out - r_in) / (n1 - 1)
            self.c2 = np.arange(n2) * (2.0 * math.pi / n2)
            self.h2 = 2.0 * math.pi / n2
            self.periodic1 = False
            self.periodic2 = True
            self.r_inner_eff = r_in
            self.r_outer_eff = r_out
        elif kind == DomainKind.CHANNEL:
            self.c1 = np.arange(n1) * (spec.length_x / n1)
            self.h1 = spec.length_x / n1
            self.c2 = np.linspace(0.0, spec.length_y, n2)
            self.h2 = spec.length_y / (n2 - 1)
            self.periodic1 = True
            self.periodic2 = False
        else:  # torus
            self.c1 = np.arange(n1) * (spec.length_x / n1)
            self.h1 = spec.length_x / n1
            self.c2 = np.arange(n2) * (spec.length_y / n2)
            self.h2 = spec.length_y / n2
            self.periodic1 = True
            self.periodic2 = True

        self.polar = spec.polar
        C1 = self.c1[:, None]
        C2 = self.c2[None, :]
        if self.polar:
            self.r = np.broadcast_to(C1, (n1, n2)).copy()
            self.theta = np.broadcast_to(C2, (n1, n2)).copy()
            self.x = self.r * np.cos(self.theta)
            self.y = self.r * np.sin(self.theta)
        else:
            self.r = None
            self.theta = None
            self.x = np.broadcast_to(C1, (n1, n2)).copy()
            self.y = np.broadcast_to(C2, (n1, n2)).copy()

        w1 = self._axis_weights(self.c1, self.h1, self.periodic1)
        w2 = self._axis_weights(self.c2, self.h2, self.periodic2)
        self.weights = w1[:, None] * w2[None, :]
        if self.polar:
            self.weights = self.weights * self.r

        for a in (self.c1, self.c2, self.x, self.y, self.weights):
            a.setflags(write=False)
        if self.polar:
            self.r.setflags(write=False)
            self.theta.setflags(write=False)
        # Per-grid caches for factorizations and the boundary frame.
        self._cache: dict = {}

    @staticmethod
    def _axis_weights(c, h, periodic):
        n = len(c)
        if periodic:
            return np.full(n, h)
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        return w

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def nnodes(self):
        return self.n1 * self.n2

    def min_spacing(self) -> float:
        """Smallest physical cell edge (arc length for the angular direction)."""
        if self.polar:
            return min(self.h1, float(self.c1[0]) * self.h2)
        return min(self.h1, self.h2)

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature-weighted volume integral of nodal values."""
        return float(np.sum(self.weights * values))

    def area_quadrature(self) -> float:
        return self.integrate(np.ones(self.shape))

    def has_boundary(self) -> bool:
        return self.spec.kind != DomainKind.TORUS


def build_grid(spec: DomainSpec, n1: int, n2: int) -> Grid:
    """Build a structured grid; raises InvalidSpec / ResolutionTooLow."""
    return Grid(spec, n1, n2)


@dataclass(frozen=True)
class BoundaryComponent:
    """One closed boundary loop with its analytic moving frame.

    Arrays are ordered by the grid index along the free coordinate.
    `orientation` is +1 when that index order follows the positive tangent
    tau and -1 otherwise; `spacing` is the (uniform) arc length between
    consecutive nodes.  `artificial` marks the disk's pole hole.
    """

    name: str
    axis: int
    index: int
    x: np.ndarray
    y: np.ndarray
    nu: np.ndarray      # (m, 2) outward unit normal
    tau: np.ndarray     # (m, 2) positively oriented unit tangent
    curvature: np.ndarray  # (m,) h = <grad_tau nu, tau>
    ds: np.ndarray      # (m,) arc-length quadrature weight
    spacing: float
    orientation: int
    artificial: bool = False

    @property
    def n_nodes(self) -> int:
        return len(self.curvature)

    def perimeter(self) -> float:
        return float(np.sum(self.ds))


class BoundaryFrame:
    """All boundary components of a grid with their moving frames."""

    def __init__(self, grid: Grid, components: tuple[BoundaryComponent, ...]):
        self.grid = grid
        self.components = components

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def physical_components(self):
        return tuple(c for c in self.components if not c.artificial)

    def perimeter(self) -> float:
        return sum(c.perimeter() for c in self.components)


def _circle_component(grid, name, index, outward_sign, artificial=False):
    # outward_sign = +1 when the domain-outward normal is +e_r.
    r_b = float(grid.c1[index])
    theta = grid.c2
    er = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    nu = outward_sign * er
    tau = np.stack([-nu[:, 1], nu[:, 0]], axis=1)  # rotate nu by +90 degrees
    h = outward_sign / r_b
    orientation = outward_sign  # tau = +e_theta on outer, -e_theta on inner
    return BoundaryComponent(
        name=name,
        axis=0,
        index=index,
        x=r_b * er[:, 0],
        y=r_b * er[:, 1],
        nu=nu,
        tau=tau,
        curvature=np.full(grid.n2, h),
        ds=np.full(grid.n2, r_b * grid.h2),
        spacing=r_b * grid.h2,
        orientation=orientation,
        artificial=artificial,
    )


def _wall_component(grid, name, index, outward_sign):
    # outward_sign = +1 for the top wall (nu = +e_y), -1 for the bottom.
    y_b = float(grid.c2[index])
    xs = grid.c1
    m = grid.n1
    nu = np.zeros((m, 2))
    nu[:, 1] = outward_sign
    tau = np.stack([-nu[:, 1], nu[:, 0]], axis=1)
    orientation = -outward_sign  # bottom: tau = +e_x, top: tau = -e_x
    return BoundaryComponent(
        name=name,
        axis=1,
        index=index,
        x=xs.copy(),
        y=np.full(m, y_b),
        nu=nu,
        tau=tau,
        curvature=np.zeros(m),
        ds=np.full(m, grid.h1),
        spacing=grid.h1,
        orientation=orientation,
    )


def boundary_frame(grid: Grid) -> BoundaryFrame:
    """Analytic boundary frame for a grid; raises NoBoundary on the torus.

    Sign convention: h = <grad_tau nu, tau>, so a circle of radius R seen
    from inside has h = 1/R while the inner circle of an annulus (outward
    normal pointing toward the center) has h = -1/r_inner.  Deterministic:
    identical inputs yield bit-identical outputs.
    """
    if not grid.has_boundary():
        raise NoBoundary("torus has an empty boundary set")
    cached = grid._cache.get("frame")
    if cached is not None:
        return cached
    kind = grid.spec.kind
    if kind in (DomainKind.ANNULUS, DomainKind.DISK):
        comps = (
            _circle_component(grid, "inner", 0, -1,
                              artificial=(kind == DomainKind.DISK)),
            _circle_component(grid, "outer", grid.n1 - 1, +1),
        )
    else:  # channel
        comps = (
            _wall_component(grid, "bottom", 0, -1),
            _wall_component(grid, "top", grid.n2 - 1, +1),
        )
    frame = BoundaryFrame(grid, comps)
    grid._cache["frame"] = frame
    return frame


def boundary_zeros(frame: BoundaryFrame) -> list[np.ndarray]:
    return [np.zeros(c.n_nodes) for c in frame]


def boundary_from_function(frame: BoundaryFrame, fn) -> list[np.ndarray]:
    """Sample fn(x, y) -> array on every boundary component."""
    return [np.asarray(fn(c.x, c.y), dtype=float) * np.ones(c.n_nodes)
            for c in frame]


def second_fundamental_form(frame: BoundaryFrame, u_vals, w_vals) -> list[np.ndarray]:
    """Pointwise pi(u, w) = h * <u, tau> <w, tau> on each component.

    u_vals / w_vals are per-component (m, 2) vector values; only the
    tangential parts enter in the 2D reduction.
    """
    out = []
    for comp, u, w in zip(frame, u_vals, w_vals):
        ut = u[:, 0] * comp.tau[:, 0] + u[:, 1] * comp.tau[:, 1]
        wt = w[:, 0] * comp.tau[:, 0] + w[:, 1] * comp.tau[:, 1]
        out.append(comp.curvature * ut * wt)
    return out


def surface_integrate(frame: BoundaryFrame, f) -> float:
    """Sum of f * ds over all boundary components.

    f may be a list of per-component arrays or a scalar; second-order
    accurate (exact for the uniform closed loops used here).
    """
    if np.isscalar(f):
        return float(f) * frame.perimeter()
    return float(sum(np.sum(comp.ds * vals) for comp, vals in zip(frame, f)))
