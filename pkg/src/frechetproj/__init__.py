"""Discrete Frechet distance and DTW under projection to a random line."""

from .errors import ContractError, CurveFormatError, DegenerateDistanceError, DimensionError
from .generators import ForkSpec, StarSpec, WedgeSpec, gen_fork_matrix, gen_random_walk, gen_star, gen_wedge
from .geom import (
    angle_pdf,
    project_curve,
    project_curves,
    project_point,
    reduction_bound,
    reduction_cdf,
    sample_unit_vector,
    sample_unit_vectors,
)
from .guarding import (
    GuardingSet,
    build_guarding,
    extended_groups,
    find_avoidable,
    partition,
    remove_avoidable,
    theorem_bound,
    trim_full,
    trim_row,
    verify_guarding,
)
from .kernels import BACKEND
from .metrics import (
    discrete_frechet,
    discrete_frechet_bruteforce,
    distance_matrix,
    dtw,
    dtw_bruteforce,
    free_space,
    traversal_exists,
)
from .montecarlo import ExperimentConfig, bucket_stats, ecdf, run_pair, run_prefix_protocol, run_subcurve_protocol
from .packing import ball_curve_length, merge_intervals, packedness_estimate, sparse_radius

__version__ = "0.1.0"
