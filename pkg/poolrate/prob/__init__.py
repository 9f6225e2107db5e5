from .distributions import (
    FiniteDist,
    StochKernel,
    JointTable,
    joint_from_kernels,
    normalise_weights,
)

from .information import (
    kl_divergence,
    entropy,
    mutual_information,
    conditional_mutual_information,
    information_density,
    information_density_table,
    posterior_kernel,
)
