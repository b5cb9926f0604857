"""Exception types raised across the package."""


class BayesCondError(Exception):
    """Base class for all package errors."""


class NonFiniteIntegrand(BayesCondError, ArithmeticError):
    pass


class EmptyMeasure(BayesCondError, ValueError):
    pass


class GridSpecError(BayesCondError, ValueError):
    pass


class GridTooCoarse(GridSpecError):
    pass


class ZeroMass(BayesCondError, ArithmeticError):
    pass


class DivergentMass(BayesCondError, ArithmeticError):
    pass


class NotADensity(BayesCondError, ValueError):
    pass


class ZeroProbabilityEvent(BayesCondError, ArithmeticError):
    """Raised when asked to condition on an event of probability zero."""


class DataImpossibleUnderModel(ZeroMass):
    pass


class ImproperPosterior(DivergentMass):
    pass


class DomainError(BayesCondError, ValueError):
    pass


class SingularTransform(BayesCondError, ArithmeticError):
    pass


class BoundaryMaximum(UserWarning):
    """Warning category: a 1-D search found its maximum on the search boundary."""


class ModelError(BayesCondError, ValueError):
    """A model-file error with a 1-based source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0, node: str | None = None):
        self.message = message
        self.line = line
        self.column = column
        self.node = node
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class ParseError(ModelError):
    pass


class UnknownDistribution(ModelError):
    pass


class UndefinedReference(ModelError):
    pass


class DuplicateName(ModelError):
    pass


class CycleDetected(ModelError):
    def __init__(self, message: str, line: int = 0, column: int = 0, path: tuple = ()):
        super().__init__(message, line, column, node=path[0] if path else None)
        self.path = tuple(path)


class InvalidDependency(ModelError):
    pass


class InvalidScale(ModelError):
    pass


class UnboundData(ModelError):
    pass
