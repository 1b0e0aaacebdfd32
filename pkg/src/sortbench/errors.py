"""Exception hierarchy shared by every sortbench module."""


class SortbenchError(Exception):
    """Base class; ``step`` is filled in by :func:`sortbench.engine.run`."""

    step: int | None = None


class InvalidEpsilon(SortbenchError, ValueError):
    pass


class InvalidN(SortbenchError, ValueError):
    pass


class InvalidParams(SortbenchError, ValueError):
    pass


class ValueOutOfInterval(SortbenchError, ValueError):
    pass


class CapacityExceeded(SortbenchError, RuntimeError):
    """A strategy was asked to place more values than it can hold."""


class TooLarge(SortbenchError, ValueError):
    pass


class InvalidSpec(SortbenchError, ValueError):
    pass


class ConfigError(SortbenchError, ValueError):
    pass
