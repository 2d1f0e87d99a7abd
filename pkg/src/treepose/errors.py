"""Exception hierarchy shared by every stage of the pipeline."""


class TreePoseError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class StructureError(TreePoseError, ValueError):
    """A relational graph is not a tree (cycle, disconnected, bad root...)."""

    exit_code = 4


class DataError(TreePoseError, ValueError):
    """Input data violates an invariant (missing weights, empty groups...)."""

    exit_code = 4


class ConfigError(TreePoseError, ValueError):
    """A required parameter is missing or out of range."""

    exit_code = 5


class ParseError(TreePoseError):
    """A file could not be parsed at all."""

    exit_code = 3
