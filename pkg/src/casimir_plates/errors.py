"""Exception hierarchy shared by all modules."""


class CasimirError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CasimirError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapabilityError(CasimirError):
    """The requested operation is not supported for this input (e.g. derivative order)."""


class AccuracyError(CasimirError):
    """A series or quadrature did not reach the requested tolerance.

    ``achieved`` carries the best error bound that was reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SingularityError(CasimirError, ValueError):
    """Evaluation at a point where the quantity diverges."""


class DecompositionError(CasimirError):
    """The two routes of an energy decomposition disagree beyond tolerance."""


class SpecMismatchError(CasimirError):
    """The singular part supplied for a finite-part integral does not match the integrand."""
