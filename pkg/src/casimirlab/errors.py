"""Exception hierarchy.

Every error raised by the library derives from :class:`CasimirLabError`.  The
three families map one-to-one onto the CLI exit codes: argument/config
problems (1), numerical failures (2) and resource limits (3).
"""


class CasimirLabError(Exception):
    exit_code = 2


class InvalidArgumentError(CasimirLabError, ValueError):
    exit_code = 1


class ConfigError(InvalidArgumentError):
    pass


class InvalidComparisonError(InvalidArgumentError):
    """Two configurations cannot be compared (different IR box, dimension...)."""


class NumericalError(CasimirLabError):
    exit_code = 2


class ImaginaryFrequencyError(NumericalError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class UVValidityError(NumericalError):
    pass


class TruncationError(NumericalError):
    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class QuadratureError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass


class NonConvergenceError(NumericalError):
    pass


class DivergentMomentError(NumericalError):
    pass


class UnsupportedCutoffError(NumericalError):
    pass


class ResourceLimitError(CasimirLabError):
    exit_code = 3

    def __init__(self, message, cap=None):
        super().__init__(message)
        self.cap = cap
