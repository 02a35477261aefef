"""Convolutive inverses with certified decay bounds, dual windows of spline-type
spaces and iterative reconstruction from nonuniform samples."""
from .bounds import (
    BoundReport,
    DecayCertificate,
    bound_dual_window,
    bound_one_dim,
    bound_recursive_op,
    bound_riesz,
    constant_K,
    constant_S,
    constant_W,
    sampling_bounds,
    sampling_rho,
    solve_max_delta,
)
from .errors import (
    AliasingError,
    Divergent,
    GridTooSmall,
    HypothesisFailed,
    Infeasible,
    NotContracting,
    NotDense,
    NotInvertible,
    NotRieszBasis,
    QuadratureError,
    SplineDeconvError,
)
from .sampling import (
    PartitionOfUnity,
    SamplingSet,
    hat_jitter_stats,
    oscillation_bound,
    reconstruct,
    sampled_gram,
    validate_set,
)
from .sequences import MultiIndex, WeightedSequence, convolve, load_sequence, momentum, save_sequence
from .spline import (
    SplineModel,
    analyze,
    bspline,
    build_model,
    dual_window,
    function_amalgam_norm,
    generator_from_spec,
    lp_norm,
    sampled_generator,
    synthesize,
    two_sided_exponential,
)
from .symbol import build_symbol, certify_range, deconvolve, deconvolve_auto, momentum_op

__version__ = "0.1.0"
