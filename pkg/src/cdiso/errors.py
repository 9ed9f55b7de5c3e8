"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceBudgetError(RuntimeError):
    """An enumeration or solver exceeded its configured budget."""


class SolverError(RuntimeError):
    """An exact solver failed to converge or returned an infeasible answer."""


class ChainIsometryError(RuntimeError):
    """A needle chain violates the along-ray isometry beyond tolerance."""

    def __init__(self, message: str, defect: float, tol: float):
        super().__init__(message)
        self.defect = defect
        self.tol = tol
