"""
Exception hierarchy shared by every liftc component.
"""
from typing import Any, Optional


class LiftError(Exception):
    """Base class for all liftc errors."""


# Source frontend


class SourceError(LiftError):
    """
    A problem located in a source program.

    Attributes:
        message: Human readable description
        line: 1-based line of the offending construct
        col: 1-based column of the offending construct
    """

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def format(self, path: str = "<source>") -> str:
        """Render the error as ``file:line:col: message``."""
        return f"{path}:{self.line}:{self.col}: {self.message}"

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class SourceSyntaxError(SourceError):
    """The source text does not match the grammar."""


class SourceTypeError(SourceError):
    """The source program is ill-typed or uses an undeclared variable."""


class NonCanonicalLoop(SourceError):
    """A for loop is not of the form ``for (i = e; i < bound; i = i + 1)``."""


# Runtime faults raised by both interpreters


class RuntimeFault(LiftError):
    """A run-time error, optionally tied to a source program point."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.col}: {self.message}"


class DivisionByZero(RuntimeFault):
    """Integer division or remainder by zero."""


class IndexOutOfBounds(RuntimeFault):
    """A list or matrix index outside ``[0, len)``."""


# IR evaluation


class EvalError(LiftError):
    """Base class for IR evaluation failures."""


class UnknownOperator(EvalError):
    """A call names neither a DSL operator, a primitive nor a bound closure."""


class ArityMismatch(EvalError):
    """An operator or closure was applied to the wrong number of arguments."""


class IRTypeError(EvalError):
    """A value or expression has the wrong type."""


class FuelExhausted(EvalError):
    """Evaluation exceeded its step budget."""


# DSL catalog


class DslError(LiftError):
    """Base class for catalog errors."""


class UnknownDsl(DslError):
    """No catalog file exists for the requested DSL name."""


class MalformedDslFile(DslError):
    """A catalog file failed to load or validate."""


class NoExampleDefined(DslError):
    """The DSL ships no one-shot invariant example."""


# Candidate engine


class EngineError(LiftError):
    """Base class for candidate-engine errors."""


class NoLoops(EngineError):
    """An invariant prompt was requested for a loop-free source."""


class ProviderError(EngineError):
    """A live provider answered with an error or could not be reached."""

    def __init__(self, status: int, body: str):
        super().__init__(f"provider error {status}: {body}")
        self.status = status
        self.body = body


class ReplayExhausted(EngineError):
    """The replay file has no entries left for the requested phase."""


class EnumerationExhausted(EngineError):
    """The enumerator reached its size bound or candidate limit."""


class WrongProvider(EngineError):
    """An operation was requested from a provider that does not support it."""


# Verifier


class VerificationError(LiftError):
    """Base class for verifier errors."""


class InvariantCountMismatch(VerificationError):
    """The number of invariants differs from the number of loops."""


class UnencodableConstruct(VerificationError):
    """An expression cannot be expressed in the solver encoding."""

    def __init__(self, message: str, node: Any = None):
        super().__init__(message)
        self.node = node


class SolverLaunchError(VerificationError):
    """The solver executable could not be started."""


class SolverProtocolError(VerificationError):
    """The solver produced output that is not a verdict."""


# Codegen and driver


class NoRuleMatches(LiftError):
    """No rewrite rule covers a call node."""

    def __init__(self, message: str, node: Any = None):
        super().__init__(message)
        self.node = node


class MalformedBenchmark(LiftError):
    """A benchmark directory is missing files or names an unknown DSL."""
