"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class AcrdsError(Exception):
    """Base class for all package errors."""


class ConfigError(AcrdsError, ValueError):
    """Invalid user-supplied parameters or configuration."""


class EdgeListParseError(ConfigError):
    def __init__(self, line_number: int, line: str, reason: str = "expected two non-negative integers"):
        self.line_number = line_number
        self.line = line
        super().__init__(f"line {line_number}: {reason}: {line!r}")


class SelfLoopError(ConfigError):
    def __init__(self, node, line_number: int | None = None):
        self.node = node
        self.line_number = line_number
        where = f" (line {line_number})" if line_number is not None else ""
        super().__init__(f"self-loop on node {node}{where}")


class NodeRangeError(AcrdsError, IndexError):
    pass


class SizeGuardError(AcrdsError):
    """Dense computation requested above the supported node count."""


class UndefinedStatisticError(AcrdsError):
    pass


class IsolatedNodeError(AcrdsError):
    """A node has no positively weighted out-edge."""

    def __init__(self, node: int, message: str | None = None):
        self.node = node
        super().__init__(message or f"node {node} has zero row sum")


class AntiClusterDeadNodeError(IsolatedNodeError):
    pass


class NonReversibleSchemeError(AcrdsError):
    pass


class DisconnectedGraphError(AcrdsError):
    pass


class PeriodicChainError(AcrdsError):
    pass


class DimensionMismatchError(AcrdsError, ValueError):
    pass


class EmptySeedClassError(AcrdsError):
    pass


class TreeDied(AcrdsError):
    """Referral tree ran out of eligible recruits before reaching its target.

    The partial tree and records gathered so far are attached.
    """

    def __init__(self, tree, records, target: int):
        self.tree = tree
        self.records = records
        self.target = target
        super().__init__(f"referral tree died after {len(records)} of {target} samples")
