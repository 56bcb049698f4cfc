"""Exception hierarchy.

Everything raised deliberately by the package derives from :class:`QllgError`.
Numerical failures (eigensolver breakdown, blow-up) derive from
:class:`NumericalError` so callers such as the CLI can map them to a single
exit status; input problems derive from ``ValueError`` as well.
"""


class QllgError(Exception):
    """Base class for all package errors."""


class NumericalError(QllgError):
    """A computation broke down. ``record`` holds a partial trajectory if any."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class NonConvergence(NumericalError):
    pass


class NumericalBlowup(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class NonNegligibleImaginaryPart(NumericalError):
    pass


class InputError(QllgError, ValueError):
    """Invalid argument supplied by the caller."""


class DimensionOverflow(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class NotHermitian(InputError):
    pass


class InvalidLattice(InputError):
    pass


class InvalidProbabilityVector(InputError):
    pass


class UnknownTableau(InputError, KeyError):
    pass


class NotRankOne(InputError):
    pass


class ConfigError(InputError):
    """Bad run configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
