# Error types raised across the poolrate package. The command line front end
# maps them onto exit codes (see poolrate.cli).

from typing import List, Optional, Tuple


class PoolrateError(Exception):
    """Base class of every error raised by poolrate."""


class ValidationError(PoolrateError, ValueError):
    """An instance or a distribution violates one of its invariants.

    Parameters
    ----------
    message : str
        Human readable description.
    field : str, optional
        Name of the offending field, e.g. ``"p_y_given_x"``.
    index : optional
        Row, position or key inside the field.
    issues : list of tuple, optional
        All ``(field, index, message)`` triples collected during validation.
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        index=None,
        issues: Optional[List[Tuple[str, object, str]]] = None,
    ):
        self.reason = message
        self.field = field
        self.index = index
        self.issues = list(issues) if issues is not None else []
        if field is not None:
            location = field if index is None else f"{field}[{index}]"
            message = f"{location}: {message}"
        super().__init__(message)


class AssumptionError(ValidationError):
    """A distortion d(w;h) is infinite."""


class AlphabetError(PoolrateError, ValueError):
    pass


class AxisError(PoolrateError, ValueError):
    pass


class SupportError(PoolrateError, ValueError):
    """A quantity was requested on a zero-probability atom."""


class CoverageError(PoolrateError, ValueError):
    """An explicit algorithm table misses a reachable dataset."""


class RangeError(PoolrateError, ValueError):
    pass


class DomainError(PoolrateError, ValueError):
    pass


class DecompositionError(PoolrateError, ValueError):
    pass


class ConvergenceError(PoolrateError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    Parameters
    ----------
    message : str
        Description including the failing parameter.
    last_gap : float, optional
        Last objective decrease or duality gap seen by the solver.
    """

    def __init__(self, message: str, last_gap: Optional[float] = None):
        self.last_gap = last_gap
        if last_gap is not None:
            message = f"{message} (last gap {last_gap:.3e})"
        super().__init__(message)


class DependencyError(PoolrateError, RuntimeError):
    """A pipeline step needs the output of a step that has not been run."""


class BudgetError(PoolrateError, RuntimeError):
    """An exhaustive enumeration would exceed its budget.

    Parameters
    ----------
    message : str
        What was being enumerated.
    required : int
        Number of items the enumeration would need.
    budget : int
        The configured budget.
    """

    def __init__(self, message: str, required: int, budget: int):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            f"{message}: requires {self.required} items, budget is {self.budget}"
        )
