"""Geodesic triangles in SU(3)/U(2), their three-channel interferometers, and the geometric phase."""

from .errors import (
    DegenerateTriangle,
    IllConditionedFit,
    InvalidOverlap,
    NotCyclic,
    OutOfRange,
    Su3PhaseError,
    UndefinedDecomposition,
    UndefinedPhase,
)
from .experiment import (
    CountRecord,
    FringeRecord,
    PhaseEstimate,
    backward_amplitude,
    estimate_phase,
    forward_amplitude,
    fringe,
    low_light_counts,
    port_probabilities,
)
from .geometry import (
    GeodesicTriangle,
    Psi3Angles,
    TriangleParams,
    bargmann_phase,
    extract_angles,
    geodesic_point,
    geometric_phase_closed_form,
    holonomy_phase_discrete,
    triangle_vertices,
)
from .linalg import StateVector, Unitary3, apply, inner, mat_mul, random_su3
from .optics import (
    BsParams,
    Element,
    ElementSequence,
    Kind,
    decompose_su3,
    element_sequence_for,
    geodesic_operator,
    interferometer_matrix,
    r12,
    r23,
    triangle_sequence,
)

__version__ = "0.1.0"
