"""Exception types raised across the package."""


class AntPlaceError(Exception):
    """Base class for every error raised by antplace."""


class GraphError(AntPlaceError):
    pass


class UnknownId(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DuplicateId(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class NegativeWeight(GraphError, ValueError):
    pass


class EmptyGraph(AntPlaceError):
    """Raised when an operation needs a live vertex and there is none."""


class NoLiveResources(AntPlaceError):
    """Advice was requested while no color (resource) is live."""


class TooLarge(AntPlaceError, ValueError):
    """Exhaustive enumeration refused because the instance is too big."""


class TraceSyntaxError(AntPlaceError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class ScheduleError(AntPlaceError, ValueError):
    pass
