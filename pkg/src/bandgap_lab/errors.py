"""Exception hierarchy.

Input problems (bad parameters, malformed spec files, points on the bands)
derive from :class:`InputError`; numerical breakdowns derive from
:class:`NumericalFailure`.  The CLI maps the two families to exit codes 2
and 3.
"""


class BandgapLabError(Exception):
    """Base class for all package errors."""


class InputError(BandgapLabError, ValueError):
    """Invalid user input."""


class DomainError(InputError):
    """A point lies where a functional or operator is undefined."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DegenerateGapError(InputError):
    """Two bands touch; the caller must merge them first."""


class SizeError(InputError):
    """A perturbation window does not fit the requested truncation."""


class NumericalFailure(BandgapLabError, ArithmeticError):
    """An iterative routine failed to converge or a solve was too ill-posed."""

    def __init__(self, message, fingerprint=None):
        if fingerprint:
            message = f"{message} [matrix {fingerprint}]"
        super().__init__(message)
        self.fingerprint = fingerprint


class NearSingularError(NumericalFailure):
    """lambda is numerically on the spectrum of the operator being inverted."""


class ContourError(NumericalFailure):
    """A winding-number contour passes too close to a zero."""
