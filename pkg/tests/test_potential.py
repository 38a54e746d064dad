import numpy as np
import pytest

from monoflux.potential import (
    PotentialSpec,
    check_nonnegativity,
    custom_polynomial,
    double_well,
    ginzburg_landau,
)


def test_double_well_values():
    dw = double_well()
    assert dw.value(1.0) == 0.0
    assert dw.value(0.0) == 0.25
    assert dw.value(-1.0) == 0.0


def test_ginzburg_landau_on_unit_circle():
    gl = ginzburg_landau(2)
    assert abs(gl.value((0.6, 0.8))) <= 1e-15
    assert gl.value((0.0, 0.0)) == 0.25


def test_double_well_gradient():
    dw = double_well()
    assert dw.gradient(0.0) == pytest.approx([0.0])
    assert dw.gradient(2.0) == pytest.approx([6.0])


def test_ginzburg_landau_gradient_at_minimum():
    gl = ginzburg_landau(2)
    np.testing.assert_allclose(gl.gradient((1.0, 0.0)), [0.0, 0.0], atol=1e-15)


def test_custom_polynomial_linear():
    lin = custom_polynomial([0.0, 1.0])  # W(u) = u
    assert lin.value(0.5) == 0.5
    assert lin.gradient(0.5) == pytest.approx([1.0])


def test_dimension_mismatch_rejected():
    gl = ginzburg_landau(2)
    with pytest.raises(ValueError):
        gl.value((1.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        gl.gradient(1.0)


def test_kind_constraints():
    with pytest.raises(ValueError):
        PotentialSpec("double_well", 2)
    with pytest.raises(ValueError):
        PotentialSpec("ginzburg_landau", 1)
    with pytest.raises(ValueError):
        PotentialSpec("custom_polynomial", 1)  # no coefficients
    with pytest.raises(ValueError):
        PotentialSpec("no_such_kind", 1)


def test_batched_evaluation_shapes():
    gl = ginzburg_landau(2)
    pts = np.zeros((5, 7, 2))
    assert np.shape(gl.value(pts)) == (5, 7)
    assert gl.gradient(pts).shape == (5, 7, 2)


@pytest.mark.parametrize(
    "spec,box",
    [
        (double_well(), (-2.0, 2.0)),
        (ginzburg_landau(2), (-2.0, 2.0)),
        (ginzburg_landau(3), (-1.5, 1.5)),
        (custom_polynomial([1.0, 0.0, -1.0, 0.0, 2.0]), (-2.0, 2.0)),
    ],
)
def test_gradient_matches_finite_differences(spec, box):
    # Central differences of the value, step 1e-5, relative to 1 + |grad W|.
    rng = np.random.default_rng(42)
    lo, hi = box
    pts = rng.uniform(lo, hi, size=(100, spec.m))
    step = 1e-5
    for p in pts:
        g = np.asarray(spec.gradient(p))
        fd = np.empty(spec.m)
        for a in range(spec.m):
            e = np.zeros(spec.m)
            e[a] = step
            fd[a] = (spec.value(p + e) - spec.value(p - e)) / (2 * step)
        denom = 1.0 + float(np.linalg.norm(g))
        assert np.max(np.abs(fd - g)) / denom <= 1e-6


def test_catalog_nonnegative_on_validity_boxes():
    for spec, box in [(double_well(), (-2.0, 2.0)), (ginzburg_landau(2), (-2.0, 2.0))]:
        rng = np.random.default_rng(7)
        pts = rng.uniform(box[0], box[1], size=(500, spec.m))
        assert np.min(spec.value(pts)) >= 0.0


def test_nonnegativity_double_well():
    v = check_nonnegativity(double_well(), (-2.0, 2.0), 101)
    assert v.passed
    assert v.worst_violation == pytest.approx(0.0, abs=1e-15)
    assert abs(abs(v.worst_location[0]) - 1.0) <= 1e-12  # minimum sits at +-1


def test_nonnegativity_ginzburg_landau_grid():
    v = check_nonnegativity(ginzburg_landau(2), (-2.0, 2.0), 51)
    assert v.passed


def test_nonnegativity_fails_for_linear_potential():
    v = check_nonnegativity(custom_polynomial([0.0, 1.0]), (-1.0, 1.0), 41)
    assert not v.passed
    assert v.worst_location[0] == pytest.approx(-1.0)
    assert v.worst_violation == pytest.approx(1.0)


def test_nonnegativity_input_validation():
    with pytest.raises(ValueError):
        check_nonnegativity(double_well(), (-2.0, 2.0), 1)
    with pytest.raises(ValueError):
        check_nonnegativity(double_well(), (2.0, -2.0), 11)
    with pytest.raises(ValueError):
        check_nonnegativity(ginzburg_landau(2), [(-1, 1)], 11)
