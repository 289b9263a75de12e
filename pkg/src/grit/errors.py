"""Exception hierarchy shared across the package.

Every user-facing failure derives from :class:`GritError` so the CLI can map
it onto a single exit code for input/validation problems.
"""


class GritError(Exception):
    """Base class for all recoverable errors raised by this package."""


class ScenarioError(GritError):
    """Malformed scenario file or inconsistent lane graph."""


class TrajectoryError(GritError):
    """Malformed trajectory data or broken frame timing."""


class ModelError(GritError):
    """Model file fails structural or numeric validation."""


class PropositionError(GritError):
    """Proposition file is malformed or references unknown goals/features."""
