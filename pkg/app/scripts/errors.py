"""
Ultralap Errors

Version: 1.0

Description:
    Exception hierarchy shared by the library, the command line and the desktop
    front-end. Every exception carries the process exit code the command line
    reports for it:

        0  ok
        2  configuration error (schema or semantic)
        3  precondition failure or divergence
        4  unsupported initial data (returned, never raised)
        5  internal error

Usage:
    try:
        run_task(...)
    except UltralapError as e:
        sys.exit(e.exit_code)
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_UNSUPPORTED = 4
EXIT_INTERNAL = 5


class UltralapError(Exception):
    """Base class of every error raised by the library."""
    exit_code = EXIT_INTERNAL


class ConfigError(UltralapError, ValueError):
    """Semantic configuration error (asymmetric weights, bad domains, ...)."""
    exit_code = EXIT_CONFIG


class SchemaError(ConfigError):
    """The configuration file does not match the JSON schema."""


class PreconditionError(UltralapError, ValueError):
    """An operation was called outside its domain of definition."""
    exit_code = EXIT_PRECONDITION


class DivergenceError(PreconditionError):
    """A length-weighted series over the group does not converge."""


class BudgetError(PreconditionError):
    """Word enumeration would exceed the configured word budget."""


class PoleError(PreconditionError):
    """A Mobius transformation was evaluated at (or around) its pole."""


class PoleInsideDisc(PoleError):
    """The pole of a transformation lies in the disc being mapped."""


class DepthError(PreconditionError):
    """A tree vertex cannot be refined to the requested depth."""


class FormVanishesError(DepthError):
    """The differential form has a zero or a pole on a disc."""


class ZeroDistance(PreconditionError):
    """Two points (or discs) that must be distinct coincide."""


class XDependenceError(PreconditionError):
    """An eigenvalue depends on the sample point; the partition is too coarse."""


class DegenerateVertex(PreconditionError):
    """Wavelets were requested at a vertex with a single child."""


class NegativeTime(PreconditionError):
    """A semigroup was evaluated at a negative time."""


class AbsorbingState(PreconditionError):
    """The jump process reached a state with zero total jump rate."""
