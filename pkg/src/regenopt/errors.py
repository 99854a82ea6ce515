"""Exception hierarchy shared across the package."""


class RegenoptError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(RegenoptError, ValueError):
    """An operation received an argument outside its documented domain."""


class ParseError(RegenoptError, ValueError):
    """An input document is syntactically malformed.

    ``location`` carries the best available position information
    (line/column for JSON syntax errors, a field path otherwise).
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(message if location is None else f"{message} (at {location})")


class ValidationError(RegenoptError, ValueError):
    """A structurally valid document violates a model invariant.

    ``field`` names the offending field or element.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class GenerationError(RegenoptError, RuntimeError):
    """The random instance generator exhausted its resampling budget."""


class InfeasibleInstanceError(RegenoptError, RuntimeError):
    """The communication graph is disconnected: no placement can connect all nodes."""


class GameInfeasibleError(InfeasibleInstanceError):
    """The adversarial game reached a deviation state with a disconnected graph."""


class NonConvergenceError(RegenoptError, RuntimeError):
    """An iterative method exceeded its safety cap without converging."""


class SolveTimeout(RegenoptError, RuntimeError):
    """A solve exceeded its wall-clock limit."""
