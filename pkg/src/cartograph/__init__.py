"""Cartographic (affine) invariants of semitoric integrable systems.

The package computes, for a catalog of concrete integrable systems on
four-dimensional phase spaces, the planar region obtained by straightening
the singular affine structure of the momentum-map image with vertical cuts
at focus-focus values: singularity classification, reduced fiber volumes,
the piecewise integer-shear group acting on regions, the typed-strip region
model, and a config-driven CLI that emits region documents, volume tables
and schematic SVG drawings.
"""

from .affine import (
    CutShear,
    FocusFocusDatum,
    PiecewiseShear,
    TauElement,
    cut_shear,
    epsilon_to_cuts,
    jump_index,
    shear_power,
    sign_change_shear,
)
from .cartography import (
    CartographicSample,
    GridSpec,
    StripPlan,
    StripSpec,
    action_map,
    build_cartographic_region,
    cartographic_sample,
    continuation_powers,
    derivative_jump,
    fit_piecewise_linear,
    inferred_case,
    membership_case,
    monodromy_jump_check,
    partition_strips,
    rationalize_slope,
    slope_jump_formula,
)
from .errors import CartographError, ConvergenceError, DomainError, ValidationError
from .numerics import (
    McVolume,
    QuadratureSpec,
    ReducedOrbit,
    adaptive_quad,
    effective_potential,
    mc_fiber_volume,
    pendulum_action,
    potential_minimum,
    reduced_orbit,
    turning_points,
)
from .regions import (
    BoundaryDescriptor,
    CartographicRegion,
    TypedRegion,
    apply_shear,
    classify_region,
    construct_region,
    equivalence_witness,
    normalize_mod_tau,
    region_from_json,
    region_to_json,
    regions_equivalent,
    slice_length,
)
from .systems import (
    Chart,
    FiberBounds,
    PiecewisePolynomial,
    SemitoricSystem,
    SingularityType,
    SystemMetadata,
    classify_critical_point,
    eval_F,
    fiber_boundaries,
    linearization_spectrum,
    make_system,
    pendulum_isotropy_weights,
    reduced_volume,
)

__version__ = "0.1.0"
