"""Minimize the largest generalized eigenvalue of an affine symmetric pencil.

The library covers the pencil and its smoothed largest-eigenvalue surrogate,
projection onto volume-capped box constraints, four first-order solvers, a
bisection-based global certifier, and a truss eigenfrequency frontend that
builds pencils from ground structures.
"""

from .linalg import (
    GenEigDecomposition,
    NoConvergence,
    NotPositiveDefinite,
    cholesky,
    gen_eig,
    multiplicity,
    sym_eig,
)
from .pencil import (
    AffinePencil,
    DimensionMismatch,
    PointSpectrum,
    evaluate,
    pencil_from_dict,
    pencil_to_dict,
    spectrum_at,
    sublevel_gap,
)
from .smoothing import (
    ClarkeElement,
    InvalidL,
    OrderViolation,
    SmoothEval,
    SpectraplexViolation,
    clarke_element,
    inexact_gradient,
    pseudoconvexity_gap,
    smooth_eval,
    smooth_gradient,
    smooth_value,
)
from .feasible import (
    FeasibleSet,
    InfeasibleSet,
    contains,
    diameter_sq,
    feasible_from_dict,
    feasible_to_dict,
    project,
)
from .report import convergence_figure, design_figure
from .truss import (
    DofOutOfRange,
    GroundStructure,
    PointMass,
    TrussModel,
    TrussProblem,
    UnderConstrained,
    assemble,
    canonical_instance,
    canonical_problem,
    design_to_csv,
    design_to_svg,
    generate_grid,
    load_truss_json,
    save_truss_json,
    truss_from_dict,
    truss_to_dict,
)
from .solvers import (
    BisectResult,
    BracketInvalid,
    InnerInconclusive,
    IterationTrace,
    SolverConfig,
    ZeroSubgradient,
    bisect,
    default_x0,
    estimate_alpha0,
    solve,
    solve_sapg,
    solve_spg,
    solve_spg_zc,
    solve_subgrad,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "GenEigDecomposition",
    "NoConvergence",
    "NotPositiveDefinite",
    "cholesky",
    "gen_eig",
    "multiplicity",
    "sym_eig",
    "AffinePencil",
    "DimensionMismatch",
    "PointSpectrum",
    "evaluate",
    "pencil_from_dict",
    "pencil_to_dict",
    "spectrum_at",
    "sublevel_gap",
    "ClarkeElement",
    "InvalidL",
    "OrderViolation",
    "SmoothEval",
    "SpectraplexViolation",
    "clarke_element",
    "inexact_gradient",
    "pseudoconvexity_gap",
    "smooth_eval",
    "smooth_gradient",
    "smooth_value",
    "FeasibleSet",
    "InfeasibleSet",
    "contains",
    "diameter_sq",
    "feasible_from_dict",
    "feasible_to_dict",
    "project",
    "BisectResult",
    "BracketInvalid",
    "InnerInconclusive",
    "IterationTrace",
    "SolverConfig",
    "ZeroSubgradient",
    "bisect",
    "default_x0",
    "estimate_alpha0",
    "solve",
    "solve_sapg",
    "solve_spg",
    "solve_spg_zc",
    "solve_subgrad",
    "write_trace_csv",
    "DofOutOfRange",
    "GroundStructure",
    "PointMass",
    "TrussModel",
    "TrussProblem",
    "UnderConstrained",
    "assemble",
    "canonical_instance",
    "canonical_problem",
    "convergence_figure",
    "design_figure",
    "design_to_csv",
    "design_to_svg",
    "generate_grid",
    "load_truss_json",
    "save_truss_json",
    "truss_from_dict",
    "truss_to_dict",
]
