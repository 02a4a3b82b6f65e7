"""Exception hierarchy shared across the package."""


class CdAnnealError(Exception):
    """Base class for all package-specific failures."""


class DimensionMismatchError(CdAnnealError):
    """Operands act on different qubit counts."""


class ParameterError(CdAnnealError):
    """An argument is outside its documented domain."""


class ResourceCapError(CdAnnealError):
    """A size cap (dense matrix, state vector, term count) would be exceeded."""


class SingularGaugeError(CdAnnealError):
    """A counterdiabatic coefficient denominator fell below the singular floor.

    Carries enough context (site, schedule value, offending denominator,
    Trotter step) for a harness to record and exclude the instance instead
    of silently clamping.
    """

    def __init__(self, message, *, site=None, lam=None, value=None, step=None):
        super().__init__(message)
        self.site = site
        self.lam = lam
        self.value = value
        self.step = step


class IntegratorError(CdAnnealError):
    """The reference integrator failed to reach the final time."""
