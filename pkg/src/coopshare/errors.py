"""Exception hierarchy shared by every module."""

from __future__ import annotations


class CoopShareError(Exception):
    """Base class for all library errors."""


class GameFormatError(CoopShareError, ValueError):
    """A game document or table failed validation."""


class MissingCoalition(GameFormatError):
    pass


class NotNormalized(GameFormatError):
    pass


class NotMonotone(GameFormatError):
    def __init__(self, message: str, subset: int | None = None, superset: int | None = None):
        super().__init__(message)
        self.subset = subset
        self.superset = superset


class BadPermutation(GameFormatError):
    pass


class NegativeValue(GameFormatError):
    pass


class PlayerInCoalition(CoopShareError, ValueError):
    pass


class PlayerNotInGround(CoopShareError, ValueError):
    pass


class StepOutOfRange(CoopShareError, IndexError):
    pass


class NotSimpleGame(CoopShareError, ValueError):
    pass


class NotSuperadditive(CoopShareError, ValueError):
    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


class ZeroGame(CoopShareError, ValueError):
    pass


class ScopeTooLarge(CoopShareError, ValueError):
    pass


class DecompositionError(CoopShareError, RuntimeError):
    """Internal invariant of the greedy decomposition loop was broken."""
