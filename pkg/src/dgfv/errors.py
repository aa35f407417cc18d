"""Exception hierarchy shared by all solver modules."""


class SolverError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SolverError):
    """Invalid or inconsistent run configuration."""


class InvalidDegreeError(SolverError):
    """Polynomial degree outside the supported range."""


class InconsistentRuleError(SolverError):
    """Quadrature weights do not form a valid rule (e.g. do not sum to 2)."""


class DegenerateBasisError(SolverError):
    """Interpolation nodes are not distinct."""


class OperatorConstructionError(SolverError):
    """An operator matrix violates a structural property beyond tolerance."""


class UnphysicalStateError(SolverError):
    """Nonpositive density or pressure encountered."""

    def __init__(self, message, rho=None, pressure=None):
        super().__init__(message)
        self.rho = rho
        self.pressure = pressure


class EntropyInversionError(SolverError):
    """Entropy-variable vector cannot be mapped back to a physical state."""


class DegenerateBarStateError(SolverError):
    """Bar state undefined: zero wave speed with unequal fluxes."""


class TelescopingClosureError(SolverError):
    """Staggered-flux recurrence did not close onto the right interface flux."""


class MetricInconsistencyError(SolverError):
    """Subcell normal recurrence did not close onto the element face normal."""


class InvalidWarpError(SolverError):
    """Mesh warp produced a nonpositive Jacobian."""


class StepFailureError(SolverError):
    """A Runge-Kutta stage produced an unphysical state."""

    def __init__(self, message, stage):
        super().__init__(message)
        self.stage = stage
