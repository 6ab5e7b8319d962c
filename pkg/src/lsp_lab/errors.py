"""Exception types shared across the package.

Every error raised by the public API derives from LspLabError, so callers
can catch one base class at the boundary (the CLI does exactly that).
"""

from __future__ import annotations


class LspLabError(Exception):
    """Base class for all package errors."""


class DomainError(LspLabError):
    """An argument is outside the mathematical domain of the operation."""


class ClassificationError(LspLabError):
    """A tail class is required but cannot be determined.

    Raised for custom densities without a declared tail class; the
    classifier never guesses from samples of the hazard.
    """


class InfiniteMeanError(LspLabError):
    """The target density has no finite first absolute moment.

    No competitive search plan exists in this case, so the solver refuses
    to run rather than returning a sequence with unbounded expected time.
    """


class BracketError(LspLabError):
    """A root-search bracket does not straddle the quantity sought."""

    def __init__(self, msg: str, lo: float | None = None, hi: float | None = None):
        super().__init__(msg)
        self.lo = lo
        self.hi = hi


class NonMonotonePredicateError(LspLabError):
    """The shooting outcome does not flip monotonically across the bracket.

    Bisection on the forward map is only sound when undershoot and
    overshoot separate cleanly.  When they do not, the caller should fall
    back to the finite-horizon optimizer, which does not rely on the
    forward map at all.
    """


class ConvergenceError(LspLabError):
    """An iterative optimizer ran out of iterations.

    The last iterate is attached so the caller can inspect how far the
    run got.
    """

    def __init__(self, msg: str, last_iterate=None):
        super().__init__(msg)
        self.last_iterate = last_iterate


class WindowError(LspLabError):
    """A comparison window is too short or out of range for the sequence."""


class NotApplicableError(LspLabError):
    """The requested law or operation is undefined for this density family."""
