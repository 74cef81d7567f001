"""Random walks on the chambers of a hyperplane arrangement.

Build an arrangement (geometrically or from :mod:`chamberwalk.gallery`), put
a probability measure on its faces, and study the walk ``C -> F * C``: exact
transition matrices and stationary laws, strong stationary times and the
separation distance bounds they imply.
"""
from .arrangement import (
    Arrangement,
    BlockPartition,
    Face,
    Hyperplane,
    block_partition,
    enumerate_faces,
    format_signs,
    is_separating,
    parse_signs,
    sign_product,
)
from .measure import FaceMeasure
from .walks import (
    Distribution,
    TransitionMatrix,
    Trajectory,
    run_walk,
    sample_face,
    stationary_monte_carlo,
    stationary_solve,
    stationary_until_chamber,
    stationary_without_replacement,
    transition_matrix,
)
from .sst import (
    BoundCurve,
    CurveKind,
    StoppingReport,
    SymmetryCertificate,
    bound_thm1,
    bound_thm2,
    bound_thm3,
    conditional_law,
    detect_stopping_times,
    separation_exact,
    simulate_stopping_times,
    tail_T1_exact,
    tail_T2_exact,
    tail_T3_exact,
    verify_certificate,
)

__version__ = "0.1.0"
