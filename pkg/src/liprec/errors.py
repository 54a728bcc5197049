"""Exception hierarchy shared across the toolkit.

Every error carries the process exit code the CLI maps it to:
2 = configuration / usage, 3 = convergence, 4 = capacity,
5 = required assertion flag missing.
"""

from __future__ import annotations


class LiprecError(Exception):
    exit_code = 2


class ConfigError(LiprecError):
    """Malformed or inconsistent configuration input."""

    exit_code = 2


class DomainError(LiprecError):
    """Parameter tuple or state outside a model family's domain."""

    exit_code = 2


class PreconditionError(LiprecError):
    """Operation called outside its documented domain."""

    exit_code = 2


class ConvergenceError(LiprecError):
    """Iteration budget exhausted before the stopping rule fired."""

    exit_code = 3


class BracketError(ConvergenceError):
    """Root bracket does not enclose a sign change."""

    exit_code = 3


class MomentDivergenceError(ConvergenceError):
    """Moment estimate blew up inside the requested range."""

    exit_code = 3


class CapacityError(LiprecError):
    """Enumeration or memory guard tripped."""

    exit_code = 4


class AssertionFlagError(LiprecError):
    """Experiment needs a user-asserted hypothesis flag that is absent."""

    exit_code = 5
