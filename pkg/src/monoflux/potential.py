"""Catalog of nonnegative potentials W and their exact gradients.

Every potential is supplied in closed form (value and gradient) so that the
solver and the tensor checks never pay a finite-difference penalty on the
nonlinearity.  Points are vectors in R^m; all evaluators accept batched
arrays with the component axis last.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .verdict import NONNEGATIVITY, Verdict, make_verdict

DOUBLE_WELL = "double_well"
GINZBURG_LANDAU = "ginzburg_landau"
CUSTOM_POLYNOMIAL = "custom_polynomial"
KINDS = (DOUBLE_WELL, GINZBURG_LANDAU, CUSTOM_POLYNOMIAL)

NONNEGATIVITY_TOL = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    """A potential W: R^m -> [0, inf) from the catalog.

    ``coefficients`` is only meaningful for the custom polynomial kind,
    where it lists ascending-power coefficients of a single-variable
    polynomial (m = 1); nonnegativity is then the caller's responsibility
    and is only probed by :func:`check_nonnegativity`.
    """

    kind: str
    m: int = 1
    coefficients: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.m < 1:
            raise ValueError("m must be a positive integer")
        if self.kind == DOUBLE_WELL and self.m != 1:
            raise ValueError("double_well requires m = 1")
        if self.kind == GINZBURG_LANDAU and self.m < 2:
            raise ValueError("ginzburg_landau requires m >= 2")
        if self.kind == CUSTOM_POLYNOMIAL:
            if self.m != 1:
                raise ValueError("custom_polynomial supports m = 1 only")
            if not self.coefficients:
                raise ValueError("custom_polynomial needs coefficients")
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        elif self.coefficients is not None:
            raise ValueError(f"{self.kind} takes no coefficients")

    def _points(self, p):
        q = np.asarray(p, dtype=float)
        if q.ndim == 0:
            q = q.reshape(1)
        if q.shape[-1] != self.m:
            raise ValueError(f"point dimension {q.shape[-1]} does not match m={self.m}")
        return q

    def value(self, p):
        """W(p); batched over any leading axes."""
        q = self._points(p)
        if self.kind == DOUBLE_WELL:
            u = q[..., 0]
            w = 0.25 * (1.0 - u * u) ** 2
        elif self.kind == GINZBURG_LANDAU:
            s = np.sum(q * q, axis=-1)
            w = 0.25 * (1.0 - s) ** 2
        else:
            w = npoly.polyval(q[..., 0], self.coefficients)
        return float(w) if w.ndim == 0 else w

    def gradient(self, p):
        """grad W(p) in R^m; batched over any leading axes."""
        q = self._points(p)
        if self.kind == DOUBLE_WELL:
            u = q[..., 0]
            g = (u * u * u - u)[..., None]
        elif self.kind == GINZBURG_LANDAU:
            s = np.sum(q * q, axis=-1)
            g = (s - 1.0)[..., None] * q
        else:
            c = self.coefficients
            dc = tuple(k * c[k] for k in range(1, len(c))) or (0.0,)
            g = npoly.polyval(q[..., 0], dc)[..., None]
        return g


def double_well():
    return PotentialSpec(DOUBLE_WELL, 1)


def ginzburg_landau(m=2):
    return PotentialSpec(GINZBURG_LANDAU, m)


def custom_polynomial(coefficients):
    return PotentialSpec(CUSTOM_POLYNOMIAL, 1, tuple(coefficients))


def check_nonnegativity(spec, box, samples_per_axis) -> Verdict:
    """Probe W >= 0 on a tensor grid over an axis-aligned box in R^m.

    ``box`` is either a single (lo, hi) pair applied to every component or a
    sequence of m pairs.  The verdict's violation is how far the sampled
    minimum dips below zero, and its location is the minimizing sample point
    (first in lexicographic order on ties).
    """
    if samples_per_axis < 2:
        raise ValueError("samples_per_axis must be >= 2")
    b = np.asarray(box, dtype=float)
    if b.shape == (2,):
        b = np.tile(b, (spec.m, 1))
    if b.shape != (spec.m, 2):
        raise ValueError(f"box must be (lo, hi) or {spec.m} pairs")
    if np.any(b[:, 0] >= b[:, 1]):
        raise ValueError("box must have lo < hi on every axis")
    axes = [np.linspace(lo, hi, samples_per_axis) for lo, hi in b]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(mesh, axis=-1).reshape(-1, spec.m)
    vals = np.asarray(spec.value(pts))
    k = int(np.argmin(vals))
    location = tuple(float(c) for c in pts[k])
    return make_verdict(NONNEGATIVITY, -float(vals[k]), location, NONNEGATIVITY_TOL)
