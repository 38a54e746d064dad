"""Stress tensor assembly and its certified identities.

T_ij = sum_a (d u_a / d x_i)(d u_a / d x_j) - delta_ij * e with
e = 0.5 |grad u|^2 + W(u).  Three identities hold for arbitrary fields
(symmetry, the trace identity, positivity of T + e I as the Gram matrix of
the gradient) and are checked to roundoff.  Two more hold only along
solutions and carry discretization error: the row-wise divergence vanishes
at second order under refinement, and the ball integral of the trace
balances the weighted boundary flux R * integral of nu.T.nu (the identity
obtained by pairing the divergence-free rows with the position vector).
"""

from dataclasses import dataclass

import numpy as np

from .field import Field, energy_density_grid, grad_squared_grid, gradient, gradient_grid
from .monotonicity import _check_radius, ball_integral, sphere_integral, w_density

EIG_DEGENERACY_EPS = 1e-30


@dataclass(frozen=True)
class TensorSample:
    """Stress tensor at one node, with the energy density and |grad W| cached."""

    location: tuple
    T: np.ndarray
    e: float
    gradW_norm: float


@dataclass(frozen=True)
class DivergenceResult:
    """Row-divergence magnitudes: per-node array (NaN outside the admissible
    two-ring margin), max norm, and h-weighted discrete L2 norm."""

    per_node: np.ndarray
    max_norm: float
    l2_norm: float


@dataclass(frozen=True)
class PohozaevBalance:
    lhs: float
    rhs: float
    residual: float


def stress_tensor(field: Field, idx) -> TensorSample:
    """Assemble T at one interior node from the central-difference gradient."""
    idx = tuple(int(i) for i in idx)
    G = gradient(field, idx)
    u = field.values[idx]
    w = field.potential.value(u)
    g2 = float(np.sum(G * G))
    e = 0.5 * g2 + w
    T = np.einsum("ai,aj->ij", G, G)
    T[np.diag_indices_from(T)] -= e
    gw = field.potential.gradient(u)
    return TensorSample(location=idx, T=T, e=e, gradW_norm=float(np.sqrt(np.sum(gw * gw))))


def stress_tensor_grid(field: Field):
    """T and e on the full grid: shapes (*grid, n, n) and (*grid,).

    The outermost ring is zero-filled (gradients are interior-only).
    """
    G = gradient_grid(field)
    e = energy_density_grid(field)
    T = np.einsum("...ai,...aj->...ij", G, G)
    for i in range(field.grid.n):
        T[..., i, i] -= e
    return T, e


def trace_residual(sample: TensorSample, gradnorm2, W_val) -> float:
    """|tr T + ((n-2)/2 |grad u|^2 + n W)|; an algebraic identity, <= 1e-12."""
    n = sample.T.shape[0]
    return float(abs(np.trace(sample.T) + (0.5 * (n - 2) * gradnorm2 + n * W_val)))


def min_eig_sym2(A):
    """Smallest eigenvalue(s) of symmetric 2x2 matrices, closed form.

    Accepts a single (2, 2) matrix or a stack (..., 2, 2).
    """
    A = np.asarray(A, dtype=float)
    a = A[..., 0, 0]
    b = A[..., 0, 1]
    c = A[..., 1, 1]
    mid = 0.5 * (a + c)
    d = np.sqrt((0.5 * (a - c)) ** 2 + b * b)
    out = mid - d
    return float(out) if out.ndim == 0 else out


def _largest_eig_sym3(A):
    # Largest root of the characteristic cubic, trigonometric form.  The
    # largest root is the well-conditioned one; small roots are recovered by
    # deflation instead because the cubic loses half the digits at (near-)
    # double roots.
    q = (A[..., 0, 0] + A[..., 1, 1] + A[..., 2, 2]) / 3.0
    B = np.array(A, copy=True)
    for i in range(3):
        B[..., i, i] -= q
    p = np.sqrt(np.sum(B * B, axis=(-2, -1)) / 6.0)
    safe_p = np.where(p > EIG_DEGENERACY_EPS, p, 1.0)
    C = B / safe_p[..., None, None]
    detC = (
        C[..., 0, 0] * (C[..., 1, 1] * C[..., 2, 2] - C[..., 1, 2] * C[..., 2, 1])
        - C[..., 0, 1] * (C[..., 1, 0] * C[..., 2, 2] - C[..., 1, 2] * C[..., 2, 0])
        + C[..., 0, 2] * (C[..., 1, 0] * C[..., 2, 1] - C[..., 1, 1] * C[..., 2, 0])
    )
    r = np.clip(detC / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam = q + 2.0 * p * np.cos(phi)
    return np.where(p > EIG_DEGENERACY_EPS, lam, q), p, q


def _cross(u, v):
    out = np.empty(np.broadcast(u, v).shape)
    out[..., 0] = u[..., 1] * v[..., 2] - u[..., 2] * v[..., 1]
    out[..., 1] = u[..., 2] * v[..., 0] - u[..., 0] * v[..., 2]
    out[..., 2] = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    return out


def min_eig_sym3(A):
    """Smallest eigenvalue(s) of symmetric 3x3 matrices, closed form.

    The largest eigenvalue comes from the trigonometric solution of the
    characteristic cubic (it is always well conditioned); its eigenvector is
    built from cross products of rows, the matrix is restricted to the
    orthogonal complement, and the 2x2 closed form finishes.  This keeps
    full precision at (near-)double small eigenvalues, where the direct
    cubic formula only reaches sqrt(machine eps).  Accepts stacks
    (..., 3, 3).
    """
    A = np.asarray(A, dtype=float)
    lam1, p, q = _largest_eig_sym3(A)
    M = np.array(A, copy=True)
    for i in range(3):
        M[..., i, i] -= lam1
    # Eigenvector for lam1: the largest cross product of two rows of M.
    rows = [M[..., i, :] for i in range(3)]
    cands = np.stack([_cross(rows[0], rows[1]), _cross(rows[0], rows[2]), _cross(rows[1], rows[2])], axis=-2)
    norms = np.sqrt(np.sum(cands * cands, axis=-1))
    best = np.argmax(norms, axis=-1)
    v = np.take_along_axis(cands, best[..., None, None], axis=-2)[..., 0, :]
    vnorm = np.sqrt(np.sum(v * v, axis=-1))
    degenerate = vnorm <= EIG_DEGENERACY_EPS
    v = v / np.where(degenerate, 1.0, vnorm)[..., None]
    v = np.where(degenerate[..., None], np.array([1.0, 0.0, 0.0]), v)
    # Orthonormal basis of the complement of v.
    axis = np.argmin(np.abs(v), axis=-1)
    e = np.zeros_like(v)
    np.put_along_axis(e, axis[..., None], 1.0, axis=-1)
    w1 = _cross(v, e)
    w1 = w1 / np.sqrt(np.sum(w1 * w1, axis=-1))[..., None]
    w2 = _cross(v, w1)
    Aw1 = np.einsum("...ij,...j->...i", A, w1)
    Aw2 = np.einsum("...ij,...j->...i", A, w2)
    b00 = np.sum(w1 * Aw1, axis=-1)
    b01 = np.sum(w1 * Aw2, axis=-1)
    b11 = np.sum(w2 * Aw2, axis=-1)
    mid = 0.5 * (b00 + b11)
    d = np.sqrt((0.5 * (b00 - b11)) ** 2 + b01 * b01)
    lam_min = np.minimum(mid - d, lam1)
    out = np.where(p > EIG_DEGENERACY_EPS, lam_min, q)
    return float(out) if out.ndim == 0 else out


def min_eig_sym(A):
    A = np.asarray(A, dtype=float)
    if A.shape[-1] == 2:
        return min_eig_sym2(A)
    if A.shape[-1] == 3:
        return min_eig_sym3(A)
    raise ValueError("closed-form eigenvalues cover 2x2 and 3x3 only")


def positivity_min_eig(sample: TensorSample) -> float:
    """Smallest eigenvalue of T + e I (the gradient Gram matrix); >= -1e-10."""
    n = sample.T.shape[0]
    return float(min_eig_sym(sample.T + sample.e * np.eye(n)))


def positivity_min_eig_grid(field: Field) -> float:
    """Minimum over all interior nodes of the smallest eigenvalue of T + e I."""
    n = field.grid.n
    T, e = stress_tensor_grid(field)
    P = T.copy()
    for i in range(n):
        P[..., i, i] += e
    core = (slice(1, -1),) * n
    return float(np.min(min_eig_sym(P[core])))


def symmetry_defect(field: Field) -> float:
    """Max over nodes and index pairs of |T_ij - T_ji|."""
    T, _ = stress_tensor_grid(field)
    return float(np.max(np.abs(T - np.swapaxes(T, -1, -2))))


def trace_residual_grid(field: Field) -> float:
    """Max over interior nodes of the trace-identity residual."""
    n = field.grid.n
    T, _ = stress_tensor_grid(field)
    tr = np.einsum("...ii->...", T)
    g2 = grad_squared_grid(field)
    w = w_density(field)
    core = (slice(1, -1),) * n
    res = np.abs(tr + (0.5 * (n - 2) * g2 + n * w))[core]
    return float(np.max(res))


def divergence_residual(field: Field) -> DivergenceResult:
    """Central-difference divergence of each tensor row.

    Defined where both T and its neighbors are available (two rings in from
    the boundary).  For discrete solutions the max norm decays at second
    order in h; for non-solutions it stalls at the size of grad W(u).grad u.
    """
    grid = field.grid
    n = grid.n
    h = grid.h
    N = grid.points_per_axis
    if N < 7:
        raise ValueError("divergence needs at least a 7-node axis (two admissible rings)")
    T, _ = stress_tensor_grid(field)
    core2 = (slice(2, -2),) * n
    inner_shape = (N - 4,) * n
    div = np.zeros(inner_shape + (n,))
    for i in range(n):
        for j in range(n):
            plus = tuple(slice(3, -1) if ax == j else slice(2, -2) for ax in range(n))
            minus = tuple(slice(1, -3) if ax == j else slice(2, -2) for ax in range(n))
            div[..., i] += (T[plus + (i, j)] - T[minus + (i, j)]) / (2.0 * h)
    per = np.sqrt(np.sum(div * div, axis=-1))
    out = np.full(grid.shape, np.nan)
    out[core2] = per
    return DivergenceResult(
        per_node=out,
        max_norm=float(per.max()),
        l2_norm=float(np.sqrt(h**n * np.sum(per * per))),
    )


def pohozaev_balance(field: Field, R) -> PohozaevBalance:
    """Balance the ball integral of tr T against R times the boundary flux.

    lhs integrates the tensor trace over B_R; rhs integrates nu.T.nu over
    the boundary sphere and multiplies by R.  Both equal the ball integral
    of the row-divergences paired with the position vector, so their gap
    measures how far the discrete field is from divergence-free.
    """
    grid = field.grid
    R = float(R)
    _check_radius(grid, R)
    T, _ = stress_tensor_grid(field)
    tr = np.einsum("...ii->...", T)
    lhs = ball_integral(field, tr, R)
    ax = grid.axis()
    mesh = np.meshgrid(*([ax] * grid.n), indexing="ij")
    X = np.stack(mesh, axis=-1)
    r = np.sqrt(np.sum(X * X, axis=-1))
    safe = np.where(r > 0, r, 1.0)
    xhat = np.where(r[..., None] > 0, X / safe[..., None], 0.0)
    flux_density = np.einsum("...i,...ij,...j->...", xhat, T, xhat)
    rhs = R * sphere_integral(field, flux_density, R)
    return PohozaevBalance(lhs=lhs, rhs=rhs, residual=abs(lhs - rhs))
