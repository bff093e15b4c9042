"""Exception hierarchy shared across the package."""


class MinAbcError(Exception):
    """Base class for every error raised by this package."""


class TreeError(MinAbcError, ValueError):
    """A candidate graph violates a tree invariant."""


class Disconnected(TreeError):
    pass


class CycleDetected(TreeError):
    pass


class SelfLoop(TreeError):
    pass


class DuplicateEdge(TreeError):
    pass


class MalformedGraph6(MinAbcError, ValueError):
    pass


class NotATree(TreeError):
    pass


class DomainError(MinAbcError, ValueError):
    """Argument outside the domain of a function (e.g. degree < 1)."""


class InfeasibleSequence(MinAbcError, ValueError):
    pass


class OrderTooLarge(MinAbcError, ValueError):
    pass


class StoreCorrupt(MinAbcError):
    pass


class PreconditionViolated(MinAbcError, ValueError):
    pass


class UnknownExpression(MinAbcError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message by default
        return str(self.args[0]) if self.args else "unknown expression"


class NotMonotone(MinAbcError):
    pass


class NeverNegative(MinAbcError):
    pass
