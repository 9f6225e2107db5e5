from .problem import (
    DISTORTION_MODES,
    SELECTION_MODES,
    AlgorithmSpec,
    HypothesisSpec,
    LossSpec,
    ProblemInstance,
    ValidationReport,
    block_distortion,
    distortion,
    distortion_matrix,
    validate_instance,
)
from .pools import (
    CanonicalDataset,
    PoolSpace,
    SelectionSet,
    enumerate_pool_space,
    feasible_selections,
    posterior_distortion,
    posterior_distortion_matrix,
    selection_counts,
)
from .algorithms import build_algorithm_kernel, empirical_risk
from .selection import (
    DistortionBounds,
    SelectionProblem,
    ZeroRateSelection,
    build_selection_problem,
    compute_d_bounds,
    zero_rate_selection,
)
from .io import instance_from_dict, instance_to_dict, load_instance, save_instance
from .generators import (
    identity_algorithm_instance,
    random_instance,
    t1_asymmetric_instance,
    t1_iid_instance,
    t1_instance,
)
