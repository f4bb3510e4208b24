"""Critically finite real polynomial maps with prescribed combinatorics.

Given an integer sequence recording how critical and postcritical points
permute (with optional local degrees), this package validates the data,
builds the piecewise-linear model, and runs the Thurston pull-back
iteration in multiprecision arithmetic to produce the unique real
polynomial in unit-interval normal form realizing the combinatorics,
detecting and simplifying the degenerate (non-expansive) cases along the
way.
"""

from .combinatorics import (
    Combinatorics,
    CombinatoricsError,
    LapStructure,
    MappingPattern,
    ParseError,
    ValidationReport,
    expansiveness,
    laps,
    mapping_pattern,
    parse,
    pl_eval,
    render,
    simplify,
    validate,
)
from .critvals import (
    CriticalValueSpec,
    InversionResult,
    NewtonStalled,
    PhiProblem,
    RealizationError,
    RealizedMap,
    SingularJacobian,
    centered_points,
    chebyshev_init,
    continuation_invert,
    invert_phi,
    phi,
    phi_jacobian,
    realize_critical_values,
)
from .mpnum import (
    Polynomial,
    PrecisionContext,
    RootBracketError,
    antiderivative,
    definite_integral,
    poly_from_roots,
    set_precision,
    solve_monotone,
)
from .pullback import (
    CollapseEvent,
    InvalidCombinatorics,
    MarkedConfiguration,
    PullbackError,
    RunOptions,
    RunResult,
    StepRecord,
    critical_value_vector,
    detect_collapse,
    fit_error,
    init_configuration,
    mapmake,
    normalize,
    pullback_step,
    run,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
