"""Numerical lab for pairs of subspaces and the MAP/MSP projection iterations."""

from .angles import AngleProfile, dixmier_cos, friedrichs_cos, principal_angles, subspace_gap
from .dynamics import (
    IterationTrace,
    RateReport,
    error_sequence,
    estimate_q_rate,
    map_step,
    msp_step,
    operator_error_norms,
    predicted_rates,
    rate_report,
    run,
)
from .errors import (
    DegenerateStart,
    InsufficientData,
    InvalidInput,
    NoSuchStart,
    NotAnEigenvector,
    NotApplicable,
    NumericalFailure,
    OrthogonalSubspaces,
    PreconditionViolated,
    ProjLabError,
)
from .scenarios import (
    ComparisonReport,
    compare,
    counterexample_report,
    msp_beats_map_start,
    sweep,
    verify_main2,
)
from .spectral import (
    active_correspondence,
    active_spectrum,
    eig_sym,
    eigenvalue_correspondence,
    nullspace_report,
    pair_operators,
    spectral_shift,
)
from .subspace import (
    Subspace,
    SymmetricOperator,
    complement,
    intersect,
    projector,
    random_subspace,
    subspaces_with_angles,
    sum_of,
)

__version__ = "0.1.0"
