"""Exception types shared across the package."""

from __future__ import annotations


class QuasifreeError(Exception):
    """Base class for all package errors."""


class ValidationError(QuasifreeError, ValueError):
    """An input failed a structural precondition (shape, symmetry, range)."""


class DegenerateGroundStateError(QuasifreeError):
    """The one-particle spectrum has zero modes the filling cannot resolve.

    Carries the offending eigenvalues so callers can report how close to
    criticality the model sits.
    """

    def __init__(self, message: str, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class SplitNotConvergedError(QuasifreeError):
    """Asked for an index, but the split-defect series did not converge.

    The index is only defined over states whose left/right defect is
    Hilbert-Schmidt; an unconverged window series refuses the computation
    rather than guessing. Carries the diagnostic series.
    """

    def __init__(self, message: str, series=None):
        super().__init__(message)
        self.series = series


class WindowError(QuasifreeError, ValueError):
    """A site, window, or monomial support falls outside the usable chain."""


class ConfigError(QuasifreeError, ValueError):
    """A run configuration failed schema validation."""
