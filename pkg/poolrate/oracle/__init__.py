from .enumeration import (
    DominanceRecord,
    EnumerationRecord,
    EnumerationReport,
    ExcessResult,
    RandomKernelCheck,
    SelectionMap,
    converse_dominance,
    enumerate_selections,
    exact_excess_probability,
    excess_matrix,
    min_over_maps,
    random_kernel_check,
)
from .simulation import (
    STRATEGIES,
    SimReport,
    greedy_kernel,
    simulate_block,
    strategy_kernel,
    wilson_interval,
)
from .efron_stein import EfronSteinRecord, EfronSteinReport, efron_stein_check
