"""Pass/fail records shared by every certified check."""

from dataclasses import dataclass

# Property names used across the package.  The monotonicity audit emits the
# first six; the remaining ones come from the potential catalog and the
# scenario runner.
WEAK_THEOREM = "WeakTheorem"
STRONG_THEOREM = "StrongTheorem"
MODICA_STRONG_E = "ModicaStrong_e"
WEAK_E = "Weak_e"
SMYRNELIS_W = "Smyrnelis_w"
MODICA_POINTWISE = "ModicaPointwise"
NONNEGATIVITY = "Nonnegativity"
TENSOR_SYMMETRY = "TensorSymmetry"
TRACE_IDENTITY = "TraceIdentity"
POSITIVITY = "Positivity"
PROFILE_CONSISTENCY = "ProfileConsistency"
DIVERGENCE_FREE = "DivergenceFree"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one certified property check.

    ``worst_location`` is a radius for radial checks, a grid multi-index for
    pointwise checks, or a sample point for potential checks.  ``passed`` is
    always equivalent to ``worst_violation <= tolerance_used``; build
    instances through :func:`make_verdict` to keep that invariant.
    """

    property: str
    passed: bool
    worst_violation: float
    worst_location: object
    tolerance_used: float


def make_verdict(prop, worst_violation, worst_location, tolerance):
    worst_violation = float(worst_violation)
    tolerance = float(tolerance)
    return Verdict(
        property=prop,
        passed=bool(worst_violation <= tolerance),
        worst_violation=worst_violation,
        worst_location=worst_location,
        tolerance_used=tolerance,
    )
