"""Synchronization of LTI arrays coupled through matrix-weighted Laplacians.

Verify the synchronizability assumptions of an array of identical linear
systems with per-edge output matrices, synthesize coupling gains by the
CL-detectability and neutral-stability recipes, and certify the result by
spectral analysis and simulation.
"""

from .array_model import (
    CONTINUOUS,
    DISCRETE,
    ArraySpec,
    NetworkGraph,
    NormalizedGraphLaplacian,
    ValidationReport,
    build_graph,
    complete_projector,
    is_connected,
    normalized_laplacian,
    validate_spec,
)
from .builders import (
    BuiltArray,
    BuiltinExample,
    build_lc,
    build_mass_spring,
    builtin_example,
)
from .errors import (
    DimensionMismatch,
    Diverged,
    EigenvectorMatchFailed,
    Infeasible,
    MatsyncError,
    NonPositiveParameter,
    NotConnected,
    NotDetectable,
    NotNeutrallyStable,
    NotSPD,
    NotSymmetric,
    SingularP,
    SpecParseError,
    SplitIllConditioned,
    UnknownName,
)
from .gains import (
    CLDetectabilityCertificate,
    Condition14Report,
    GainSet,
    PSearchOptions,
    condition14,
    eps_bar,
    find_common_P,
    gains_ct_neutral,
    gains_dt_neutral,
    gains_theorem1,
    verify_cl_detectability,
)
from .mwl import (
    MatrixWeightedLaplacian,
    build_laplacian,
    disagreement,
    laplacian_from_outputs,
    sync_projector,
)
from .simulation import (
    ClosedLoop,
    SimTrace,
    asymptotic_anchor,
    closed_loop,
    rho_sweep,
    simulate_ct,
    simulate_dt,
)
from .spectral import (
    SpectralSplit,
    StabilityClass,
    classify_stability,
    neutral_split,
    pbh_detectable,
    pbh_observable,
    spd_sqrt,
)

__version__ = "0.1.0"

__all__ = [
    "ArraySpec",
    "BuiltArray",
    "BuiltinExample",
    "CLDetectabilityCertificate",
    "CONTINUOUS",
    "ClosedLoop",
    "Condition14Report",
    "DISCRETE",
    "DimensionMismatch",
    "Diverged",
    "EigenvectorMatchFailed",
    "GainSet",
    "Infeasible",
    "MatrixWeightedLaplacian",
    "MatsyncError",
    "NetworkGraph",
    "NonPositiveParameter",
    "NormalizedGraphLaplacian",
    "NotConnected",
    "NotDetectable",
    "NotNeutrallyStable",
    "NotSPD",
    "NotSymmetric",
    "PSearchOptions",
    "SimTrace",
    "SingularP",
    "SpecParseError",
    "SpectralSplit",
    "SplitIllConditioned",
    "StabilityClass",
    "UnknownName",
    "ValidationReport",
    "asymptotic_anchor",
    "build_graph",
    "build_laplacian",
    "build_lc",
    "build_mass_spring",
    "builtin_example",
    "classify_stability",
    "closed_loop",
    "complete_projector",
    "condition14",
    "disagreement",
    "eps_bar",
    "find_common_P",
    "gains_ct_neutral",
    "gains_dt_neutral",
    "gains_theorem1",
    "is_connected",
    "laplacian_from_outputs",
    "neutral_split",
    "normalized_laplacian",
    "pbh_detectable",
    "pbh_observable",
    "rho_sweep",
    "simulate_ct",
    "simulate_dt",
    "spd_sqrt",
    "sync_projector",
    "validate_spec",
    "verify_cl_detectability",
]
