"""Exception hierarchy shared by every module."""

from __future__ import annotations

from typing import Any


class CausalIdError(Exception):
    """Base class for all errors raised by causalid."""


class CycleError(CausalIdError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("directed cycle " + " -> ".join(self.cycle))


class DuplicateVertex(CausalIdError):
    pass


class UnknownEndpoint(CausalIdError):
    pass


class UnknownVertex(CausalIdError):
    pass


class UnknownEdge(CausalIdError):
    pass


class EdgeNotInGraph(CausalIdError):
    pass


class CapacityError(CausalIdError):
    """An enumeration would exceed its configured size limit."""


class InvalidIntervention(CausalIdError):
    pass


class NotNatural(CausalIdError):
    pass


class NotEdgeConsistent(CausalIdError):
    pass


class NotNodeConsistent(CausalIdError):
    pass


class BetaNotSubset(CausalIdError):
    pass


class InputRestrictionViolated(CausalIdError):
    pass


class ConditionsFail(CausalIdError):
    """The district conditions of the ADMG g-functional do not hold.

    ``evidence`` describes the violation in JSON-friendly form.
    """

    def __init__(self, message: str, evidence: dict[str, Any]):
        self.evidence = evidence
        super().__init__(message)


class VariableMismatch(CausalIdError):
    pass


class InvalidModel(CausalIdError):
    pass


class SearchFailed(CausalIdError):
    pass


class PositivityViolation(CausalIdError):
    pass


class EmptyData(CausalIdError):
    pass


class ParseError(CausalIdError):
    """Syntax error in a DSL or functional string, with its location."""

    def __init__(self, message: str, line: int, column: int, token: str):
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"{message} at line {line}, column {column} (near {token!r})")


class SemanticError(CausalIdError):
    """Well-formed input that refers to something invalid."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 token: str | None = None):
        self.line = line
        self.column = column
        self.token = token
        if line is not None:
            message = f"{message} at line {line}, column {column} (near {token!r})"
        super().__init__(message)
