from .gaussian import q_function, q_inverse
from .bounds import (
    CONVERSE_COLUMNS,
    ConverseReport,
    EpsilonBound,
    epsilon_objective,
    label_bound,
    reports_to_frame,
    tail_probability,
    theorem1_curve,
    theorem1_epsilon_bound,
    theorem1_report,
    theorem2_rate_bound,
    theorem3_distortion_bound,
)
