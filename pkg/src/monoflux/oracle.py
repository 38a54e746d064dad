"""Reference solutions: the 1D double-well connection, the planar vortex, constants.

The vortex profile g solves g'' + g'/r - g/r^2 = g (g^2 - 1) with g(0) = 0
and g -> 1, reduced from the radially equivariant ansatz u = g(r) x/|x| for
the Ginzburg-Landau system.  The profile is found by bisection on the slope
at the origin: slopes above the critical value drive g through 1 in finite
radius, slopes below make it turn over and crash, and the accepted slope is
the largest one that keeps g inside (0, 1) up to r_max.
"""

import math
from dataclasses import dataclass

import numpy as np

from .field import Field, Grid
from .potential import DOUBLE_WELL, GINZBURG_LANDAU, PotentialSpec

SQRT2 = math.sqrt(2.0)

HETEROCLINIC = "heteroclinic"
VORTEX = "vortex"
CONSTANT = "constant"
LINEAR = "linear"

BISECTION_WIDTH = 1e-12
SLOPE_BRACKET = (0.01, 1.0)
END_GAP_TOL = 1e-3


class BracketError(RuntimeError):
    """Raised when the shooting bracket is invalid (bad r_max or step)."""


def heteroclinic(x1):
    """The 1D connection tanh(x1 / sqrt 2) between the double-well minima."""
    return np.tanh(np.asarray(x1, dtype=float) / SQRT2)


def heteroclinic_derivative(x1):
    t = heteroclinic(x1)
    return (1.0 - t * t) / SQRT2


def heteroclinic_second_derivative(x1):
    t = heteroclinic(x1)
    return t * t * t - t


def _rhs(r, g, gp):
    return -gp / r + g / (r * r) + g * (g * g - 1.0)


def shoot(slope, r_max, ode_step, record=False):
    """Integrate the vortex ODE from a series start at r0 = ode_step.

    The start uses the series g = a r - (a/8) r^3 + O(r^5) through cubic
    order; truncating at the linear term leaves an h-independent kink at
    the core that second-difference stencils amplify.  Fixed-step classical
    RK4 on (g, g').  Returns (status, radii, values, slopes) where status
    is "crossed" (g reached 1), "fell" (g dropped to 0), or "ok"; the
    arrays are populated only when ``record`` is set.
    """
    nsteps = int(round(r_max / ode_step))
    r = ode_step
    g = slope * (r - 0.125 * r * r * r)
    gp = slope * (1.0 - 0.375 * r * r)
    rs, gs, gps = [], [], []
    if record:
        rs.append(r)
        gs.append(g)
        gps.append(gp)
    status = "ok"
    for _ in range(nsteps - 1):
        k1g = gp
        k1p = _rhs(r, g, gp)
        r2 = r + 0.5 * ode_step
        g2 = g + 0.5 * ode_step * k1g
        p2 = gp + 0.5 * ode_step * k1p
        k2g = p2
        k2p = _rhs(r2, g2, p2)
        g3 = g + 0.5 * ode_step * k2g
        p3 = gp + 0.5 * ode_step * k2p
        k3g = p3
        k3p = _rhs(r2, g3, p3)
        r4 = r + ode_step
        g4 = g + ode_step * k3g
        p4 = gp + ode_step * k3p
        k4g = p4
        k4p = _rhs(r4, g4, p4)
        g = g + ode_step * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        gp = gp + ode_step * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        r = r4
        if record:
            rs.append(r)
            gs.append(g)
            gps.append(gp)
        if g >= 1.0:
            status = "crossed"
            break
        if g <= 0.0:
            status = "fell"
            break
    return status, np.array(rs), np.array(gs), np.array(gps)


@dataclass(frozen=True)
class VortexProfile:
    """Radial vortex profile with slopes stored for cubic Hermite evaluation."""

    radii: np.ndarray
    values: np.ndarray
    slopes: np.ndarray
    slope_at_zero: float

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        g = np.asarray(self.values, dtype=float)
        gp = np.asarray(self.slopes, dtype=float)
        if r[0] != 0.0 or g[0] != 0.0:
            raise ValueError("profile must start at r=0 with g=0")
        if not (np.all(np.diff(r) > 0) and np.all(np.diff(g) > 0)):
            raise ValueError("profile radii and values must be strictly increasing")
        if g[-1] >= 1.0 or np.any(g < 0.0):
            raise ValueError("profile values must stay inside [0, 1)")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", g)
        object.__setattr__(self, "slopes", gp)

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def value_at(self, r):
        """Cubic Hermite interpolation of g; valid on [0, r_max]."""
        q = np.asarray(r, dtype=float)
        if np.any(q < 0) or np.any(q > self.r_max + 1e-9):
            raise ValueError("radius outside the solved range")
        q = np.minimum(q, self.r_max)
        k = np.clip(np.searchsorted(self.radii, q, side="right") - 1, 0, len(self.radii) - 2)
        r0 = self.radii[k]
        dr = self.radii[k + 1] - r0
        t = (q - r0) / dr
        t2 = t * t
        t3 = t2 * t
        h00 = 2.0 * t3 - 3.0 * t2 + 1.0
        h10 = t3 - 2.0 * t2 + t
        h01 = -2.0 * t3 + 3.0 * t2
        h11 = t3 - t2
        out = (
            h00 * self.values[k]
            + h10 * dr * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * dr * self.slopes[k + 1]
        )
        return float(out) if out.ndim == 0 else out


def solve_vortex(r_max, ode_step) -> VortexProfile:
    """Shoot for the vortex profile by bisection on the slope at the origin.

    The bracket (0.01, 1.0) must straddle the threshold: the low endpoint
    must fall, the high endpoint must cross 1.  Bisection runs until the
    bracket is narrower than 1e-12 and the surviving low slope is accepted.
    """
    if r_max < 10.0:
        raise ValueError("r_max must be >= 10")
    if ode_step > 1e-3 * r_max:
        raise ValueError("ode_step must be <= 1e-3 * r_max")
    lo, hi = SLOPE_BRACKET
    if shoot(lo, r_max, ode_step)[0] != "fell":
        raise BracketError(f"slope {lo} did not undershoot; bad r_max/step")
    if shoot(hi, r_max, ode_step)[0] != "crossed":
        raise BracketError(f"slope {hi} did not overshoot; bad r_max/step")
    while hi - lo > BISECTION_WIDTH:
        mid = 0.5 * (lo + hi)
        if shoot(mid, r_max, ode_step)[0] == "crossed":
            hi = mid
        else:
            lo = mid
    status, rs, gs, gps = shoot(lo, r_max, ode_step, record=True)
    if status != "ok":
        raise BracketError(f"accepted slope {lo} left (0,1) during the final integration")
    if gs[-1] < 1.0 - END_GAP_TOL:
        raise BracketError(f"profile ends at g={gs[-1]:.6f} < {1.0 - END_GAP_TOL}; increase r_max")
    radii = np.concatenate(([0.0], rs))
    values = np.concatenate(([0.0], gs))
    slopes = np.concatenate(([lo], gps))
    return VortexProfile(radii=radii, values=values, slopes=slopes, slope_at_zero=lo)


def default_vortex_profile(grid: Grid) -> VortexProfile:
    """Solve the vortex profile on a range covering the grid diagonal."""
    r_max = max(10.0, float(math.ceil(grid.extent * math.sqrt(grid.n))) + 1.0)
    return solve_vortex(r_max, 1e-3 * r_max)


def embed(kind, grid: Grid, potential: PotentialSpec, constant=None, profile=None) -> Field:
    """Sample a reference solution on the grid.

    kinds: "heteroclinic" (double well), "vortex" (Ginzburg-Landau, m=2,
    n=2), "constant" (any potential, value required), "linear" (u_1 = x_1,
    the deliberate non-solution used as a negative control).
    """
    kind = str(kind).lower()
    shape = grid.shape + (potential.m,)
    ax = grid.axis()
    if kind == HETEROCLINIC:
        if potential.kind != DOUBLE_WELL:
            raise ValueError("heteroclinic embedding requires the double well")
        profile_1d = heteroclinic(ax)
        values = np.broadcast_to(profile_1d.reshape((-1,) + (1,) * grid.n), shape).copy()
        return Field(grid, potential, values)
    if kind == VORTEX:
        if potential.kind != GINZBURG_LANDAU or potential.m != 2 or grid.n != 2:
            raise ValueError("vortex embedding requires ginzburg_landau with m=2 on n=2")
        if profile is None:
            profile = default_vortex_profile(grid)
        X = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
        r = np.sqrt(np.sum(X * X, axis=-1))
        g = np.asarray(profile.value_at(r.ravel())).reshape(r.shape)
        with np.errstate(invalid="ignore", divide="ignore"):
            direction = np.where(r[..., None] > 0, X / np.where(r[..., None] > 0, r[..., None], 1.0), 0.0)
        return Field(grid, potential, g[..., None] * direction)
    if kind == CONSTANT:
        if constant is None:
            raise ValueError("constant embedding needs a value")
        p = np.atleast_1d(np.asarray(constant, dtype=float))
        if p.shape != (potential.m,):
            raise ValueError(f"constant value must have {potential.m} components")
        return Field(grid, potential, np.broadcast_to(p, shape).copy())
    if kind == LINEAR:
        values = np.zeros(shape)
        values[..., 0] = ax.reshape((-1,) + (1,) * (grid.n - 1))
        return Field(grid, potential, values)
    raise ValueError(f"unknown embedding kind {kind!r}")
