import numpy as np
import pytest

from monoflux.field import Field, Grid
from monoflux.oracle import embed
from monoflux.potential import custom_polynomial, double_well, ginzburg_landau
from monoflux.tensor import (
    divergence_residual,
    min_eig_sym,
    min_eig_sym2,
    min_eig_sym3,
    pohozaev_balance,
    positivity_min_eig,
    positivity_min_eig_grid,
    stress_tensor,
    symmetry_defect,
    trace_residual,
    trace_residual_grid,
)

DW = double_well()
GL = ginzburg_landau(2)


def affine_field(grid, potential, A, b):
    ax = grid.axis()
    mesh = np.stack(np.meshgrid(*([ax] * grid.n), indexing="ij"), axis=-1)
    return Field(grid, potential, mesh @ np.asarray(A).T + np.asarray(b))


def test_stress_tensor_vanishes_at_minimum():
    f = embed("constant", Grid(2, 1.0, 11), DW, constant=(1.0,))
    s = stress_tensor(f, (5, 5))
    np.testing.assert_array_equal(s.T, np.zeros((2, 2)))
    assert s.e == 0.0 and s.gradW_norm == 0.0


def test_stress_tensor_of_zero_field():
    f = embed("constant", Grid(2, 1.0, 11), DW, constant=(0.0,))
    s = stress_tensor(f, (5, 5))
    np.testing.assert_allclose(s.T, -0.25 * np.eye(2), atol=0.0)
    assert s.e == 0.25


def test_stress_tensor_scalar_closed_form():
    # m=1, grad u = (a, b), W = w: direct substitution into the definition.
    a, b = 0.3, -0.7
    g = Grid(2, 1.0, 11)
    f = affine_field(g, DW, [[a, b]], [0.1])
    s = stress_tensor(f, (5, 5))
    u = f.values[5, 5, 0]
    w = DW.value(u)
    expected = np.array(
        [
            [0.5 * (a * a - b * b) - w, a * b],
            [a * b, 0.5 * (b * b - a * a) - w],
        ]
    )
    np.testing.assert_allclose(s.T, expected, atol=1e-14)


def test_trace_identity_zero_field():
    f = embed("constant", Grid(2, 1.0, 11), DW, constant=(0.0,))
    s = stress_tensor(f, (5, 5))
    assert np.trace(s.T) == pytest.approx(-0.5)
    assert trace_residual(s, 0.0, 0.25) == 0.0


def test_trace_identity_constructed_n3():
    # |grad u|^2 = 2 and W = 1 force tr T = -(1 + 3) = -4.
    one = custom_polynomial([1.0])
    g = Grid(3, 1.0, 9)
    f = affine_field(g, one, [[1.0, 1.0, 0.0]], [0.0])
    s = stress_tensor(f, (4, 4, 4))
    assert np.trace(s.T) == pytest.approx(-4.0, abs=1e-12)
    assert trace_residual(s, 2.0, 1.0) <= 1e-12


def test_trace_identity_on_random_fields():
    # The identity holds for arbitrary gradient/W pairs, not just solutions.
    rng = np.random.default_rng(11)
    g = Grid(2, 1.0, 11)
    vals = rng.uniform(-1.5, 1.5, size=g.shape + (2,))
    f = Field(g, GL, vals)
    for _ in range(20):
        idx = tuple(rng.integers(1, 10, size=2))
        s = stress_tensor(f, idx)
        w = GL.value(f.values[idx])
        gradnorm2 = 2.0 * (s.e - w)
        assert trace_residual(s, gradnorm2, w) <= 1e-12


def test_min_eig_closed_forms_match_lapack():
    rng = np.random.default_rng(5)
    A2 = rng.standard_normal((500, 2, 2))
    A2 = (A2 + np.swapaxes(A2, -1, -2)) / 2
    np.testing.assert_allclose(min_eig_sym2(A2), np.linalg.eigvalsh(A2)[:, 0], atol=1e-12)
    A3 = rng.standard_normal((500, 3, 3))
    A3 = (A3 + np.swapaxes(A3, -1, -2)) / 2
    np.testing.assert_allclose(min_eig_sym3(A3), np.linalg.eigvalsh(A3)[:, 0], atol=1e-12)


def test_min_eig_accurate_on_degenerate_gram_matrices():
    rng = np.random.default_rng(6)
    for _ in range(200):
        v = rng.standard_normal(3)
        assert abs(min_eig_sym3(np.outer(v, v))) <= 1e-12 * max(1.0, v @ v)
    G = rng.standard_normal((200, 2, 3))
    gram = np.einsum("kai,kaj->kij", G, G)
    np.testing.assert_allclose(min_eig_sym3(gram), 0.0, atol=1e-12)
    assert min_eig_sym3(2.5 * np.eye(3)) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        min_eig_sym(np.eye(4))


def test_positivity_scalar_field_rank_one():
    f = embed("heteroclinic", Grid(2, 2.5, 41), DW)
    s = stress_tensor(f, (13, 20))
    assert abs(positivity_min_eig(s)) <= 1e-12


def test_positivity_constant_field():
    f = embed("constant", Grid(2, 1.0, 11), DW, constant=(0.0,))
    assert positivity_min_eig(stress_tensor(f, (5, 5))) == 0.0


def test_positivity_everywhere_on_vortex():
    f = embed("vortex", Grid(2, 2.5, 81), GL)
    assert positivity_min_eig_grid(f) >= -1e-10


def test_symmetry_defect_everywhere():
    for f in [
        embed("heteroclinic", Grid(2, 2.5, 41), DW),
        embed("vortex", Grid(2, 2.5, 41), GL),
        embed("linear", Grid(2, 2.5, 41), DW),
        embed("heteroclinic", Grid(3, 2.5, 21), DW),
    ]:
        assert symmetry_defect(f) <= 1e-12
        assert trace_residual_grid(f) <= 1e-12


def test_divergence_zero_for_constant_equilibrium():
    f = embed("constant", Grid(2, 1.0, 11), DW, constant=(1.0,))
    d = divergence_residual(f)
    assert d.max_norm == 0.0 and d.l2_norm == 0.0


def test_divergence_decays_second_order_for_heteroclinic():
    maxes = {}
    for N in (81, 161):
        f = embed("heteroclinic", Grid(2, 2.5, N), DW)
        maxes[N] = divergence_residual(f).max_norm
    ratio = maxes[81] / maxes[161]
    assert 3.2 <= ratio <= 4.8


def test_divergence_stalls_for_non_solution():
    # Negative control: for u = x1 the rows reduce to -dW(u)/dx1, an O(1)
    # quantity that refinement cannot remove.
    maxes = {}
    for N in (81, 161):
        f = embed("linear", Grid(2, 2.5, N), DW)
        maxes[N] = divergence_residual(f).max_norm
    assert maxes[81] > 1.0 and maxes[161] > 1.0
    assert 0.5 <= maxes[81] / maxes[161] <= 2.0


def test_divergence_per_node_layout():
    f = embed("heteroclinic", Grid(2, 2.5, 21), DW)
    d = divergence_residual(f)
    assert d.per_node.shape == f.grid.shape
    assert np.all(np.isnan(d.per_node[:2, :]))
    assert np.all(np.isfinite(d.per_node[2:-2, 2:-2]))


def test_pohozaev_closed_form_for_zero_field():
    f = embed("constant", Grid(2, 2.5, 81), DW, constant=(0.0,))
    for R in (0.5, 1.0, 2.0):
        p = pohozaev_balance(f, R)
        assert p.lhs == pytest.approx(-0.5 * np.pi * R**2, rel=5e-3)
        assert p.rhs == pytest.approx(-0.5 * np.pi * R**2, rel=1e-12)


def test_pohozaev_zero_for_minimum():
    f = embed("constant", Grid(2, 2.5, 81), DW, constant=(1.0,))
    p = pohozaev_balance(f, 1.0)
    assert p.lhs == 0.0 and p.rhs == 0.0 and p.residual == 0.0


def test_pohozaev_improves_under_refinement():
    rel = {}
    for N in (81, 161):
        f = embed("heteroclinic", Grid(2, 2.5, N), DW)
        p = pohozaev_balance(f, 1.0)
        rel[N] = p.residual / abs(p.lhs)
    assert rel[81] <= 0.01
    assert rel[161] < rel[81]


def test_pohozaev_radius_validation():
    f = embed("heteroclinic", Grid(2, 2.5, 41), DW)
    with pytest.raises(ValueError):
        pohozaev_balance(f, 0.05)
    with pytest.raises(ValueError):
        pohozaev_balance(f, 2.5)
