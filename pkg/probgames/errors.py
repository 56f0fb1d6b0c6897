"""Exception hierarchy shared by every probgames module."""

from typing import Optional


class GameError(Exception):
    """Root of all probgames errors."""


class DistributionError(GameError, ValueError):
    """A distribution could not be built from the given weights."""


class NotNormalized(DistributionError):
    pass


class NegativeWeight(DistributionError):
    pass


class InterfaceMismatch(GameError, ValueError):
    pass


class UnknownStrategy(GameError, ValueError):
    pass


class UnknownState(GameError, ValueError):
    pass


class EmptyMoveSet(GameError, ValueError):
    pass


class NotBijective(GameError, ValueError):
    pass


class StrategySpaceTooLarge(GameError, ValueError):
    pass


class InvalidWitness(GameError, ValueError):
    """A decomposition witness failed its mixture identity or a branch check."""


class UnsupportedComposition(GameError):
    """Membership of a sequential composite cannot be decided without a witness."""

    def __init__(self, message: str, provenance: Optional[str] = None):
        super().__init__(message)
        self.provenance = provenance


class UnsupportedShape(GameError):
    """A solver was handed a game outside the shapes it handles."""


class GridTooLarge(GameError):
    pass


class GameFileError(GameError, ValueError):
    """A problem in a game description file, located by line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ParseError(GameFileError):
    pass


class ValidationError(GameFileError):
    pass
