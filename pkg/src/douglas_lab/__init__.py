"""Reduced (Douglas) solutions of ``B X = A`` and maps that preserve them."""

from .linalg import DEFAULT_TOL, Tolerances
from .douglas import (
    DouglasCertificate,
    NotSolvable,
    SolvabilityReport,
    douglas_solve,
    is_douglas_solution,
    majorization_constant,
    range_included,
    verify_certificate,
)
from .derived import NotPSD, moore_penrose, parallel_sum, schur_complement
from .preservers import AntiUnitary, Composite, InverseAdjoint, Similarity, Unitary, falsify
from .projective import induced_line_map, recover_semilinear

__version__ = "0.1.0"
