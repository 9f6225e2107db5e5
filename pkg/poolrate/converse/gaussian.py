import numpy as np
from scipy.special import erfc, ndtri

from poolrate.exceptions import DomainError


def q_function(x: float) -> float:
    """Gaussian tail Q(x) = P[Z > x]."""
    return float(0.5 * erfc(x / np.sqrt(2.0)))


def q_inverse(eps: float) -> float:
    """Inverse Gaussian tail, Q^{-1}(eps) = -Phi^{-1}(eps), polished with one
    Newton step.

    Raises
    ------
    DomainError
        Unless 0 < eps < 1.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"Q^-1 needs 0 < eps < 1, got {eps}")
    x = float(-ndtri(eps))
    density = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    if density > 0:
        x += (q_function(x) - eps) / density
    return float(x)
