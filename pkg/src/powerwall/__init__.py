"""Leading-order semiclassical (WKB) propagators for quadratic and linear power walls.

The wall potential vanishes for x < 0 and equals ``omega**2 x**2 / 4``
(quadratic) or ``k x`` (linear) for x >= 0.  Units: hbar = 1, m = 1/2.
"""
from .caustics import CausticPoint, trace_slice
from .classical_paths import (
    analyze_type_C_linear,
    analyze_type_C_quadratic,
    enumerate_paths,
    solve_type_A,
    solve_type_B,
    solve_type_B_special,
    solve_type_C,
    solve_type_D,
    solve_type_E,
)
from .domain import (
    BoundaryProblem,
    CausticSingular,
    ClassicalPath,
    NoPath,
    PathType,
    Potential,
    PropagatorValue,
    SclTerm,
)
from .hypothesis import GridSpec, HypothesisReport, Window, estimate_opnorm, opnorm_scan, scan_residual
from .neumann import (
    GuardBandExcluded,
    NeumannQuadrature,
    classify_domain,
    first_order_term,
    firstbound_envelope,
    q_kernel,
    table1_boundaries,
)
from .oracle import BoxEdgeContamination, StepOverflow, crank_nicolson, pde_residual, shoot
from .propagators import exact_reference, k_free, k_harmonic, k_linear, k_scl, k_scl_grid, scl_propagate
from .scl_terms import action, amplitude_sq, caustic_probe, residual, scl_term

__version__ = "0.1.0"
