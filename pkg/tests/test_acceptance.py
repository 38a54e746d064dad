"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  Fields are shared through module-scoped fixtures;
criterion 8 performs the full cold-start solves and dominates the runtime.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from monoflux.cli import main
from monoflux.field import Grid, grad_squared_grid
from monoflux.monotonicity import (
    ball_integral,
    build_profile,
    consistency_residual,
    default_radii,
    modica_check,
    monotonicity_verdict,
    scaled_profile,
    sphere_integral,
    w_density,
)
from monoflux.oracle import default_vortex_profile, embed, heteroclinic
from monoflux.potential import double_well, ginzburg_landau
from monoflux.solver import SolveConfig, minimize_energy, replace_interior
from monoflux.tensor import (
    divergence_residual,
    pohozaev_balance,
    positivity_min_eig_grid,
    symmetry_defect,
    trace_residual_grid,
)
from monoflux.verdict import MODICA_STRONG_E, SMYRNELIS_W, STRONG_THEOREM, WEAK_THEOREM

DW = double_well()
GL = ginzburg_landau(2)


def report(num, label, ok):
    print(f"ACCEPTANCE {num:>2}: {label}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {num} ({label}) failed"


@pytest.fixture(scope="module")
def vortex_profile():
    return default_vortex_profile(Grid(2, 2.5, 161))


@pytest.fixture(scope="module")
def fields(vortex_profile):
    return {
        "hetero-n2": embed("heteroclinic", Grid(2, 2.5, 161), DW),
        "hetero-n2-fine": embed("heteroclinic", Grid(2, 2.5, 321), DW),
        "hetero-n3": embed("heteroclinic", Grid(3, 2.5, 81), DW),
        "gl-vortex-n2": embed("vortex", Grid(2, 2.5, 161), GL, profile=vortex_profile),
        "gl-vortex-n2-fine": embed("vortex", Grid(2, 2.5, 321), GL, profile=vortex_profile),
        "constant-zero": embed("constant", Grid(2, 2.5, 81), DW, constant=(0.0,)),
        "constant-minimum": embed("constant", Grid(2, 2.5, 81), DW, constant=(1.0,)),
        "negative-control": embed("linear", Grid(2, 2.5, 161), DW),
        "negative-control-fine": embed("linear", Grid(2, 2.5, 321), DW),
    }


def test_criterion_1_algebraic_identity_suite(fields):
    builtins = [
        "hetero-n2",
        "hetero-n3",
        "gl-vortex-n2",
        "constant-zero",
        "constant-minimum",
        "negative-control",
    ]
    ok = True
    for name in builtins:
        f = fields[name]
        t0 = time.perf_counter()
        sym = symmetry_defect(f)
        trace = trace_residual_grid(f)
        mineig = positivity_min_eig_grid(f)
        consistency = consistency_residual(build_profile(f, default_radii(f.grid)))
        elapsed = time.perf_counter() - t0
        good = sym <= 1e-12 and trace <= 1e-12 and mineig >= -1e-10 and consistency <= 1e-10 and elapsed < 10.0
        if not good:
            print(f"  {name}: sym={sym:.2e} trace={trace:.2e} mineig={mineig:.2e} "
                  f"consistency={consistency:.2e} time={elapsed:.1f}s")
        ok = ok and good
    report(1, "algebraic identity suite on all built-ins (< 10 s each)", ok)


def test_criterion_2_divergence_refinement(fields):
    t0 = time.perf_counter()
    orders = {}
    for name in ("hetero-n2", "gl-vortex-n2"):
        coarse = divergence_residual(fields[name]).max_norm
        fine = divergence_residual(fields[name + "-fine"]).max_norm
        orders[name] = math.log2(coarse / fine)
    neg_coarse = divergence_residual(fields["negative-control"]).max_norm
    neg_fine = divergence_residual(fields["negative-control-fine"]).max_norm
    neg_ratio = neg_coarse / neg_fine
    elapsed = time.perf_counter() - t0
    ok = (
        all(1.7 <= o <= 2.3 for o in orders.values())
        and 0.5 <= neg_ratio <= 2.0
        and neg_fine > 1.0
        and elapsed < 120.0
    )
    if not ok:
        print(f"  orders={orders} negative ratio={neg_ratio:.2f} time={elapsed:.1f}s")
    report(2, "div T refinement order 2.0 +- 0.3; negative control stalls", ok)


def test_criterion_3_weak_monotonicity(fields):
    ok = True
    for name in ("hetero-n2", "hetero-n3", "gl-vortex-n2", "constant-zero"):
        f = fields[name]
        prof = build_profile(f, default_radii(f.grid))
        v = monotonicity_verdict(scaled_profile(prof, "f", f.grid.n - 2), property_name=WEAK_THEOREM)
        if not v.passed:
            print(f"  {name}: violation={v.worst_violation:.3e} tol={v.tolerance_used:.3e}")
        ok = ok and v.passed
    report(3, "weak formula: R^(2-n) f(R) nondecreasing", ok)


def test_criterion_4_strong_monotonicity(fields):
    ok = True
    for name in ("hetero-n2", "hetero-n3", "constant-zero", "constant-minimum"):
        f = fields[name]
        n = f.grid.n
        gate = modica_check(f)
        prof = build_profile(f, default_radii(f.grid))
        vf = monotonicity_verdict(scaled_profile(prof, "f", n - 1), property_name=STRONG_THEOREM)
        ve = monotonicity_verdict(scaled_profile(prof, "e", n - 1), property_name=MODICA_STRONG_E)
        good = gate.passed and vf.passed and ve.passed
        if not good:
            print(f"  {name}: gate={gate.passed} f={vf.worst_violation:.3e} e={ve.worst_violation:.3e}")
        ok = ok and good
    report(4, "strong formula under the gradient bound: R^(1-n) f and e", ok)


def test_criterion_5_planar_scalar_potential_monotonicity(fields):
    f = fields["hetero-n2"]
    prof = build_profile(f, default_radii(f.grid))
    v = monotonicity_verdict(scaled_profile(prof, "w", 1), property_name=SMYRNELIS_W)

    def w_over_ball(R):
        val, _ = quad(
            lambda t: 0.25 * (1 - heteroclinic(t) ** 2) ** 2 * 2.0 * math.sqrt(R * R - t * t),
            -R,
            R,
            epsabs=1e-12,
            limit=200,
        )
        return val

    rel_errs = [abs(wv - w_over_ball(R)) / w_over_ball(R) for R, wv in zip(prof.radii, prof.w_vals)]
    ok = v.passed and max(rel_errs) <= 1e-2
    if not ok:
        print(f"  verdict={v.passed} max rel err vs 1D reduction={max(rel_errs):.3e}")
    report(5, "planar scalar check: R^-1 w(R) nondecreasing, 1D-reduction agreement", ok)


def test_criterion_6_gradient_bound_equality_sharpness(fields):
    defects = {}
    for name in ("hetero-n2", "hetero-n2-fine"):
        f = fields[name]
        core = (slice(1, -1),) * f.grid.n
        defect = (0.5 * grad_squared_grid(f) - w_density(f))[core]
        defects[name] = float(np.max(np.abs(defect)))
    h = fields["hetero-n2"].grid.h
    ratio = defects["hetero-n2"] / defects["hetero-n2-fine"]
    ok = defects["hetero-n2"] <= 0.2 * h**2 and 3.0 <= ratio <= 5.0
    if not ok:
        print(f"  defect={defects['hetero-n2']:.3e} vs 0.2 h^2={0.2 * h ** 2:.3e}, ratio={ratio:.2f}")
    report(6, "gradient-bound equality sharp to O(h^2), ratio in [3, 5]", ok)


def test_criterion_7_pohozaev_balance(fields):
    rel = {}
    for name in ("hetero-n2", "hetero-n2-fine"):
        p = pohozaev_balance(fields[name], 1.0)
        rel[name] = p.residual / abs(p.lhs)
    ok = rel["hetero-n2-fine"] <= 0.02 and rel["hetero-n2-fine"] < rel["hetero-n2"]
    if not ok:
        print(f"  rel residual: N=161 {rel['hetero-n2']:.3e}, N=321 {rel['hetero-n2-fine']:.3e}")
    report(7, "Pohozaev balance within 2% at R=1, improving under refinement", ok)


def test_criterion_8_solver_cold_start(fields):
    deviations = {}
    ok = True
    for N in (81, 161):
        g = Grid(2, 2.5, N)
        oracle = embed("heteroclinic", g, DW)
        start = replace_interior(oracle, 0.0)
        res = minimize_energy(start, SolveConfig(max_iterations=300_000, tolerance=1e-8))
        slack = 1e-12 * (1.0 + np.abs(res.energies).max())
        deviations[N] = float(np.max(np.abs(res.field.values - oracle.values)))
        good = (
            res.converged
            and res.residual_max <= 1e-8
            and deviations[N] <= 0.1 * g.h**2
            and np.max(np.diff(res.energies)) <= slack
        )
        if not good:
            print(f"  N={N}: converged={res.converged} residual={res.residual_max:.2e} "
                  f"deviation={deviations[N]:.2e} vs {0.1 * g.h ** 2:.2e}")
        ok = ok and good
    ratio = deviations[81] / deviations[161]
    ok = ok and 2.5 <= ratio <= 6.0
    report(8, "cold-start solve: residual <= 1e-8, O(h^2) oracle deviation, energy descent", ok)


def test_criterion_9_quadrature_accuracy(fields):
    g2 = fields["hetero-n2"].grid
    f2 = fields["hetero-n2"]
    ones2 = np.ones(g2.shape)
    ball2 = max(
        abs(ball_integral(f2, ones2, R) - math.pi * R**2) / (math.pi * R**2) for R in (0.5, 1.0, 2.0)
    )
    sphere2 = max(
        abs(sphere_integral(f2, ones2, R) - 2 * math.pi * R) / (2 * math.pi * R) for R in (0.5, 1.0, 2.0)
    )
    g3 = fields["hetero-n3"].grid
    f3 = fields["hetero-n3"]
    ones3 = np.ones(g3.shape)
    ball3 = max(
        abs(ball_integral(f3, ones3, R) - 4 / 3 * math.pi * R**3) / (4 / 3 * math.pi * R**3)
        for R in (0.5, 1.0, 2.0)
    )
    sphere3 = max(
        abs(sphere_integral(f3, ones3, R) - 4 * math.pi * R**2) / (4 * math.pi * R**2) for R in (0.5, 1.0, 2.0)
    )
    ok = ball2 <= 5e-3 and ball3 <= 1e-2 and sphere2 <= 1e-3 and sphere3 <= 5e-3
    if not ok:
        print(f"  ball2={ball2:.2e} ball3={ball3:.2e} sphere2={sphere2:.2e} sphere3={sphere3:.2e}")
    report(9, "ball/sphere quadrature within 0.5%/1% and 0.1%/0.5%", ok)


def test_criterion_10_deterministic_outputs(tmp_path, capsys):
    ok = True
    for name in ("constant-zero", "negative-control"):
        digests = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}-{tag}"
            code = main(["run", "--builtin", name, "--out", str(out)])
            assert code == (1 if name == "negative-control" else 0)
            digests.append(
                {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix == ".csv"}
            )
        ok = ok and digests[0] == digests[1]
    capsys.readouterr()
    report(10, "byte-identical CSV artifacts across repeated runs", ok)
