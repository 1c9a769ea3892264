"""Exception types shared across the package.

Plain ``ValueError`` is used for domain errors (bad arguments, invalid
descriptors).  The classes below mark failures that callers may want to
distinguish programmatically, e.g. to map them to process exit codes.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """A configuration document is malformed or violates an invariant.

    The message starts with the path of the offending field, e.g.
    ``problem.a.values[1]: must be positive``.
    """


class BracketError(RuntimeError):
    """A root or eigenvalue bracket does not enclose the target.

    Raised when the shooting predicate has the same value at both bracket
    endpoints, or when an equalization bracket has inconsistent signs.
    """


class NonconvergenceError(RuntimeError):
    """An iteration budget or accuracy ceiling was exhausted."""


class SweepError(RuntimeError):
    """A homogenization sweep failed at some cell count.

    The ``partial`` attribute holds the results collected before the
    failure (a ``SweepResult`` with the completed entries), so callers can
    inspect how far the sweep got.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
