"""Exception hierarchy shared by every module."""


class HybridOptoError(Exception):
    """Base class for all package errors."""


class ParameterError(HybridOptoError, ValueError):
    """Invalid or missing physical parameter.

    ``fields`` maps offending field names to a short message so that the CLI
    can emit field-level diagnostics.
    """

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = dict(fields or {})


class SingularResponseError(HybridOptoError, ArithmeticError):
    """The feedback cavity response has a vanishing denominator."""


class NoThresholdError(HybridOptoError):
    """Raised when a threshold or bistable window is requested for a monostable system."""


class IntegrationError(HybridOptoError, ArithmeticError):
    def __init__(self, message, t_reached):
        super().__init__(f"{message} (t = {t_reached!r})")
        self.t_reached = t_reached


class NoSteadyStateError(HybridOptoError, ArithmeticError):
    def __init__(self, message, eigenvalues):
        super().__init__(message)
        self.eigenvalues = eigenvalues
