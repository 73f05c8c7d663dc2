"""Open-path non-Abelian holonomies of curves of subspaces."""

from .adiabatic import EvolutionRun, dynamical_phase, evolve, extract_gate
from .curves import Frame, FrameCurve, GaugeField, apply_gauge, continuation_frames, sample_curve
from .errors import (
    CurveTooCoarseError,
    FileFormatError,
    HolonomyError,
    IntegratorError,
    InvalidInputError,
    OrthogonalEndpointsError,
    PartialOverlapError,
)
from .holonomy import (
    HolonomyResult,
    Overlap,
    OverlapReport,
    commutator_defect,
    compute_holonomy,
    connection_at,
    decompose_gamma,
    discrete_gamma,
    gauge_transform_holonomy,
    overlap,
    parallel_frame,
    pexp_connection,
    sorted_eigenvalues,
)
from .matcore import expm_antihermitian, mp_inverse, polar_decompose

__version__ = "0.1.0"
