"""Vector fields on uniform Cartesian boxes and their finite-difference calculus.

A Grid covers the box [-L, L]^n with an odd number N of nodes per axis, so
the origin is always a node (every radial quantity is centered there).
Derivatives use second-order central stencils and are defined at interior
nodes only; sweeps that need derivatives of derivatives keep a two-node
margin.  Full-grid helper arrays (``*_grid``) zero the outermost ring, and
quadrature restricted to radii R <= L - 2h never reads it.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .potential import (
    CUSTOM_POLYNOMIAL,
    DOUBLE_WELL,
    GINZBURG_LANDAU,
    KINDS,
    PotentialSpec,
    double_well,
    ginzburg_landau,
)

FILE_MAGIC = "MONOFLUX-FIELD"
FILE_VERSION = "v1"


def f17(x) -> str:
    """Format a float with 17 significant digits (lossless round-trip)."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Grid:
    """Uniform isotropic grid on [-extent, extent]^n."""

    n: int
    extent: float
    points_per_axis: int

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValueError("spatial dimension must be 2 or 3")
        if self.extent <= 0:
            raise ValueError("extent must be positive")
        N = self.points_per_axis
        if N < 5 or N % 2 == 0:
            raise ValueError("points_per_axis must be odd and >= 5")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / (self.points_per_axis - 1)

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.n

    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.points_per_axis)

    def node_position(self, idx) -> np.ndarray:
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.n:
            raise ValueError(f"index must have {self.n} entries")
        ax = self.axis()
        return np.array([ax[i] for i in idx])


class Field:
    """A vector field u: grid nodes -> R^m tied to its potential.

    The stored array is read-only: analysis treats fields as immutable, and
    the solver builds fresh arrays for its iterates.
    """

    def __init__(self, grid: Grid, potential: PotentialSpec, values):
        arr = np.array(values, dtype=float)
        expected = grid.shape + (potential.m,)
        if arr.shape != expected:
            raise ValueError(f"values shape {arr.shape} != expected {expected}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite at every node")
        arr.setflags(write=False)
        self.grid = grid
        self.potential = potential
        self.values = arr

    @property
    def m(self) -> int:
        return self.potential.m


class ResidualNorms(NamedTuple):
    max_norm: float
    l2_norm: float


def _interior(n):
    return (slice(1, -1),) * n


def _require_interior(grid, idx, margin=1):
    idx = tuple(int(i) for i in idx)
    if len(idx) != grid.n:
        raise ValueError(f"index must have {grid.n} entries")
    N = grid.points_per_axis
    for i in idx:
        if i < margin or i > N - 1 - margin:
            raise ValueError(f"node {idx} is within {margin} of the boundary; derivatives are interior-only")
    return idx


def _zero_ring(arr, n):
    # Zero the outermost node layer along every spatial axis.
    for axis in range(n):
        sl = [slice(None)] * arr.ndim
        sl[axis] = 0
        arr[tuple(sl)] = 0.0
        sl[axis] = -1
        arr[tuple(sl)] = 0.0


def gradient(field: Field, idx) -> np.ndarray:
    """Central-difference gradient at one interior node.

    Returns the m x n matrix with entry (a, i) = d u_a / d x_i; exact for
    affine fields.
    """
    idx = _require_interior(field.grid, idx)
    V = field.values
    h = field.grid.h
    n = field.grid.n
    out = np.empty((field.m, n))
    for i in range(n):
        plus = tuple(idx[j] + (1 if j == i else 0) for j in range(n))
        minus = tuple(idx[j] - (1 if j == i else 0) for j in range(n))
        out[:, i] = (V[plus] - V[minus]) / (2.0 * h)
    return out


def laplacian(field: Field, idx) -> np.ndarray:
    """(2n+1)-point Laplacian at one interior node; exact for quadratics."""
    idx = _require_interior(field.grid, idx)
    V = field.values
    h = field.grid.h
    n = field.grid.n
    acc = np.zeros(field.m)
    center = V[idx]
    for i in range(n):
        plus = tuple(idx[j] + (1 if j == i else 0) for j in range(n))
        minus = tuple(idx[j] - (1 if j == i else 0) for j in range(n))
        acc += V[plus] - 2.0 * center + V[minus]
    return acc / (h * h)


def energy_density(field: Field, idx) -> float:
    """e(x) = 0.5 |grad u|^2 + W(u) at one interior node."""
    G = gradient(field, idx)
    w = field.potential.value(field.values[tuple(int(i) for i in idx)])
    return float(0.5 * np.sum(G * G) + w)


def gradient_grid(field: Field) -> np.ndarray:
    """Central-difference gradients on the full grid, shape (*grid, m, n).

    The outermost ring is zero-filled; only interior entries are meaningful.
    """
    V = field.values
    n = field.grid.n
    h = field.grid.h
    out = np.zeros(V.shape + (n,))
    core = _interior(n)
    for i in range(n):
        plus = tuple(slice(2, None) if j == i else slice(1, -1) for j in range(n))
        minus = tuple(slice(None, -2) if j == i else slice(1, -1) for j in range(n))
        out[core + (slice(None), i)] = (V[plus] - V[minus]) / (2.0 * h)
    return out


def laplacian_grid(field: Field) -> np.ndarray:
    """Laplacian on the full grid, shape (*grid, m); ring zero-filled."""
    out = np.zeros(field.values.shape)
    out[_interior(field.grid.n)] = _laplacian_core(field.values, field.grid.h, field.grid.n)
    return out


def _laplacian_core(values, h, n):
    # Laplacian restricted to the interior block, shape (N-2,)*n + (m,).
    core = _interior(n)
    acc = -(2.0 * n) * values[core]
    for i in range(n):
        plus = tuple(slice(2, None) if j == i else slice(1, -1) for j in range(n))
        minus = tuple(slice(None, -2) if j == i else slice(1, -1) for j in range(n))
        acc = acc + values[plus] + values[minus]
    return acc / (h * h)


def grad_squared_grid(field: Field) -> np.ndarray:
    """|grad u|^2 per node, shape grid.shape; ring zero-filled."""
    G = gradient_grid(field)
    return np.sum(G * G, axis=(-2, -1))


def energy_density_grid(field: Field) -> np.ndarray:
    """e = 0.5 |grad u|^2 + W(u) per node; ring zero-filled."""
    e = 0.5 * grad_squared_grid(field) + field.potential.value(field.values)
    _zero_ring(e, field.grid.n)
    return e


def residual_grid(field: Field) -> np.ndarray:
    """PDE residual (Laplacian u - grad W(u)) per node; ring zero-filled."""
    out = np.zeros(field.values.shape)
    core = _interior(field.grid.n)
    out[core] = _laplacian_core(field.values, field.grid.h, field.grid.n) - field.potential.gradient(
        field.values[core]
    )
    return out


def residual_norm(field: Field) -> ResidualNorms:
    """Max and h-weighted discrete L2 norm of the PDE residual over interior nodes.

    The per-node magnitude is the Euclidean norm over the m components.
    """
    n = field.grid.n
    r = residual_grid(field)[_interior(n)]
    per_node = np.sqrt(np.sum(r * r, axis=-1))
    max_norm = float(per_node.max())
    l2 = float(np.sqrt(field.grid.h**n * np.sum(per_node * per_node)))
    return ResidualNorms(max_norm, l2)


def save_field(field: Field, path) -> None:
    """Write the field in the MONOFLUX-FIELD v1 text format.

    One header line, then one line per node in storage order (row-major over
    the multi-index, component index innermost), 17 significant digits.
    """
    g = field.grid
    header = (
        f"{FILE_MAGIC} {FILE_VERSION} n={g.n} m={field.m} N={g.points_per_axis} "
        f"L={f17(g.extent)} potential={field.potential.kind}"
    )
    flat = field.values.reshape(-1, field.m)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(header + "\n")
        fh.write("\n".join(" ".join(f17(v) for v in row) for row in flat))
        fh.write("\n")


def load_field(path, potential: PotentialSpec = None) -> Field:
    """Read a MONOFLUX-FIELD v1 file.

    The header stores the potential kind but not custom coefficients, so
    custom-polynomial fields require the ``potential`` argument; for the
    built-in kinds it is reconstructed (and checked when supplied).
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
    tokens = header.split()
    if len(tokens) != 7 or tokens[0] != FILE_MAGIC or tokens[1] != FILE_VERSION:
        raise ValueError(f"{path}: not a {FILE_MAGIC} {FILE_VERSION} file")
    kv = {}
    for tok in tokens[2:]:
        key, _, val = tok.partition("=")
        kv[key] = val
    try:
        n = int(kv["n"])
        m = int(kv["m"])
        N = int(kv["N"])
        L = float(kv["L"])
        kind = kv["potential"]
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}: malformed header: {header!r}") from exc
    if kind not in KINDS:
        raise ValueError(f"{path}: unknown potential kind {kind!r}")
    if potential is None:
        if kind == DOUBLE_WELL:
            potential = double_well()
        elif kind == GINZBURG_LANDAU:
            potential = ginzburg_landau(m)
        else:
            raise ValueError(f"{path}: {CUSTOM_POLYNOMIAL} fields need an explicit potential argument")
    if potential.kind != kind or potential.m != m:
        raise ValueError(f"{path}: header potential {kind}/m={m} does not match the supplied spec")
    grid = Grid(n, L, N)
    data = np.loadtxt(path, skiprows=1, ndmin=2)
    if data.shape != (N**n, m):
        raise ValueError(f"{path}: expected {N**n} lines of {m} values, got shape {data.shape}")
    return Field(grid, potential, data.reshape(grid.shape + (m,)))
