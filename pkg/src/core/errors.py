"""Exception hierarchy shared by every Scene Language module."""

from typing import Any, List, Optional, Sequence


class SceneLanguageError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 3

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# Geometry

class InvalidArgumentError(SceneLanguageError, ValueError):
    """Non-finite, zero-length or otherwise unusable numeric input."""


class SingularMatrixError(SceneLanguageError, ValueError):
    """Matrix whose linear part cannot be inverted."""


class EmptyEntityError(SceneLanguageError, ValueError):
    """Bounding-box or render query over an entity without leaf primitives."""


# Source text

class SourceError(SceneLanguageError):
    """Error tied to a location in program source."""

    exit_code = 2

    def __init__(self, message: str, span: Optional[Any] = None):
        super().__init__(message)
        self.span = span

    def __str__(self) -> str:
        if self.span is None:
            return self.message
        return f"{self.span.line}:{self.span.column}: {self.message}"


class LexError(SourceError):
    pass


class ParseError(SourceError):
    """Grammar violation; the message names the violated production."""


class ValidationFailed(SourceError):
    """Static validation produced error diagnostics."""

    def __init__(self, diagnostics: Sequence[Any]):
        first = diagnostics[0] if diagnostics else None
        super().__init__(
            f"{len(diagnostics)} validation error(s)"
            + (f"; first: {first.message}" if first is not None else ""),
            first.span if first is not None else None,
        )
        self.diagnostics = list(diagnostics)


# Execution

class ExecutionError(SceneLanguageError):
    exit_code = 3

    def __init__(self, message: str, span: Optional[Any] = None, word: Optional[str] = None):
        super().__init__(message)
        self.span = span
        self.word = word


class NoRootError(ExecutionError):
    pass


class AmbiguousRootError(ExecutionError):
    def __init__(self, candidates: Sequence[str]):
        self.candidates = sorted(candidates)
        super().__init__(
            "ambiguous root: candidates are "
            + ", ".join(f'"{c}"' for c in self.candidates)
            + "; pass an explicit entry word"
        )


class DepthLimitError(ExecutionError):
    def __init__(self, limit: int, cycle: List[str]):
        self.limit = limit
        self.cycle = list(cycle)
        super().__init__(
            f"recursion depth limit {limit} exceeded in cycle "
            + " -> ".join(f'"{w}"' for w in self.cycle),
            word=self.cycle[-1] if self.cycle else None,
        )


class PrimitiveSpecError(ExecutionError):
    pass


class InvalidLoopError(ExecutionError):
    pass


class NotTemporalError(ExecutionError):
    pass


class EvaluationError(ExecutionError):
    pass


class ArithmeticEvalError(EvaluationError):
    pass


class IndexEvalError(EvaluationError):
    pass


class TypeEvalError(EvaluationError):
    pass


class UnboundVariableError(EvaluationError):
    pass


# Backends

class BackendError(SceneLanguageError):
    exit_code = 3


class RotationForbiddenError(BackendError):
    pass


class NonIntegerPoseError(BackendError):
    pass


# Editing

class EditError(SceneLanguageError):
    exit_code = 3


class NoTargetError(EditError):
    pass


class PatchTypeError(EditError):
    pass


class OverrideFormatError(EditError):
    exit_code = 2


# I/O

class ArtifactIOError(SceneLanguageError):
    exit_code = 4

    def __init__(self, path: Any, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
