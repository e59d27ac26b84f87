"""Tree-walking evaluator turning a Program into Entity trees."""

import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from loguru import logger

from src.core.config import get_config
from src.core.errors import (
    AmbiguousRootError, DepthLimitError, EvaluationError, ExecutionError, InvalidLoopError,
    NoRootError, NotTemporalError, PrimitiveSpecError, RotationForbiddenError, SceneLanguageError,
    TypeEvalError, UnboundVariableError, ValidationFailed,
)
from src.core.transforms import Matrix4
from src.language import ast
from src.language.builtins import (
    CONSTANTS, IMPLEMENTATIONS, ROTATING_BUILDERS, SHORT_CIRCUIT, type_name,
)
from src.language.validator import errors_only, root_candidates, validate
from src.scene.model import EMPTY_EMBEDDING, BlockSpec, Embedding, Entity, PrimitiveSpec
from src.scene.queries import assign_embedding_ids

MODE_PRIMITIVES = "primitives"
MODE_MINECRAFT = "minecraft"

# Python frames used per nested entity-function call, with margin
FRAMES_PER_CALL = 16
RECURSION_CEILING = 10_000


class Posed(NamedTuple):
    """An ``(entity, matrix)`` pair produced by ``transform``."""

    entity: Entity
    pose: Matrix4


@dataclass
class Environment:
    """Word -> entity-function bindings; unbound words build primitives."""

    bindings: Dict[str, ast.Bind]
    depth_limit: int = 64

    @classmethod
    def from_program(cls, program: ast.Program, depth_limit: int) -> "Environment":
        bindings: Dict[str, ast.Bind] = {}
        for bind in program.binds:
            bindings.setdefault(bind.word, bind)
        return cls(bindings, depth_limit)

    def lookup(self, word: str) -> Optional[ast.Bind]:
        return self.bindings.get(word)


@dataclass
class ExecutionReport:
    root_word: str
    entity_count: int = 0
    leaf_count: int = 0
    max_depth_reached: int = 0
    frame_count: Optional[int] = None
    warnings: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        out = {
            "root_word": self.root_word,
            "entity_count": self.entity_count,
            "leaf_count": self.leaf_count,
            "max_depth_reached": self.max_depth_reached,
            "warnings": list(self.warnings),
        }
        if self.frame_count is not None:
            out["frame_count"] = self.frame_count
        return out


def select_root(program: ast.Program, override: Optional[str] = None) -> str:
    """Pick the entity function no other function depends on."""
    if override is not None:
        if program.bind_for(override) is None:
            raise NoRootError(f'entry word "{override}" is not bound', word=override)
        return override
    candidates = root_candidates(program)
    if not candidates:
        raise NoRootError("program has no root entity function")
    if len(candidates) > 1:
        raise AmbiguousRootError(candidates)
    return candidates[0]


class Interpreter:
    """Evaluates one program; single-threaded, not reusable across programs."""

    def __init__(self, program: ast.Program, depth_limit: Optional[int] = None,
                 mode: str = MODE_PRIMITIVES):
        settings = get_config().interpreter
        self.program = program
        self.env = Environment.from_program(program, depth_limit or settings.depth_limit)
        self.mode = mode
        self.default_color = tuple(settings.default_color)
        self.call_stack: List[str] = []
        self.warnings: List[str] = []

    def warn(self, message: str, node: Optional[ast.Node] = None):
        where = f"{node.span.line}:{node.span.column}: " if node is not None and node.span else ""
        self.warnings.append(where + message)
        logger.warning(where + message)

    # Entry points

    def run_root(self, word: str) -> Entity:
        """Invoke ``word`` with the program's root embedding (empty when absent)."""
        bind = self.env.lookup(word)
        if isinstance(bind.func, ast.TemporalFunc):
            raise ExecutionError(f'"{word}" is a 4D entity function; execute it temporally',
                                 word=word)
        root_embedding = self.program.root_embedding
        if root_embedding is None:
            return self.invoke(word, (), bind)
        return self.invoke(word, (self.evaluate(root_embedding, {}),), bind)

    def run_temporal(self, word: str) -> List[Entity]:
        bind = self.env.lookup(word)
        if not isinstance(bind.func, ast.TemporalFunc):
            raise NotTemporalError(f'"{word}" is not a 4D entity function', word=word)
        if self.program.root_embedding is not None:
            self.warn(f'root embedding is ignored by 4D entity function "{word}"',
                      self.program.root_embedding)
        if not bind.func.frames:
            self.warn(f'4D entity function "{word}" returns an empty frame list', bind)
        frames = []
        for frame_expr in bind.func.frames:
            entity = self.evaluate(frame_expr, {})
            if not isinstance(entity, Entity):
                raise TypeEvalError(f"4D frame must be an entity, got {type_name(entity)}",
                                    frame_expr.span)
            frames.append(entity)
        return frames

    # Entity functions

    def invoke(self, word: str, embeddings: Sequence[Embedding], bind: Optional[ast.Bind],
               node: Optional[ast.Node] = None) -> Entity:
        if embeddings:
            z, gamma = embeddings[0], tuple(embeddings[1:])
        else:
            z, gamma = EMPTY_EMBEDDING, ()
            if self.call_stack:
                self.warn(f'call of "{word}" has no embedding; using the empty record', node)

        if bind is None:
            return self.make_leaf(word, z, node)
        if isinstance(bind.func, ast.TemporalFunc):
            raise TypeEvalError(f'"{word}" is a 4D entity function and cannot be called',
                                node.span if node else None, word)

        if len(self.call_stack) >= self.env.depth_limit:
            raise DepthLimitError(self.env.depth_limit, _word_cycle(self.call_stack + [word]))
        self.call_stack.append(word)
        try:
            p_z, p_gamma = bind.func.params
            children = self.evaluate(bind.func.body, {p_z: z, p_gamma: gamma})
        except RecursionError:
            # the interpreter stack ran out before depth_limit; report the depth reached
            raise DepthLimitError(len(self.call_stack), _word_cycle(self.call_stack)) from None
        finally:
            self.call_stack.pop()
        return Entity(word, z, tuple((c.entity, c.pose) for c in children))

    def make_leaf(self, word: str, z: Embedding, node: Optional[ast.Node]) -> Entity:
        try:
            if self.mode == MODE_MINECRAFT:
                primitive = BlockSpec.from_embedding(z)
            else:
                primitive = PrimitiveSpec.from_embedding(z, self.default_color)
        except PrimitiveSpecError as e:
            raise PrimitiveSpecError(f'primitive "{word}": {e.message}',
                                     node.span if node else None, word) from None
        return Entity(word, z, (), primitive)

    # Expressions

    def evaluate(self, node: ast.Node, scope: Dict[str, Any]) -> Any:
        method = getattr(self, "eval_" + type(node).__name__)
        try:
            return method(node, scope)
        except EvaluationError as e:
            if e.span is None:
                e.span = node.span
            raise
        except SceneLanguageError:
            raise
        except TypeError as e:
            raise TypeEvalError(str(e), node.span) from e
        except (ValueError, ArithmeticError) as e:
            raise EvaluationError(str(e), node.span) from e

    def eval_Num(self, node, scope):
        return node.value

    def eval_Str(self, node, scope):
        return node.value

    def eval_Var(self, node, scope):
        if node.name in scope:
            return scope[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        raise UnboundVariableError(f"unbound variable '{node.name}'", node.span)

    def eval_Embed(self, node, scope):
        attrs = {}
        for entry in node.entries:
            values = [self.evaluate(v, scope) for v in entry.values]
            attrs[entry.key] = values[0] if len(values) == 1 else tuple(values)
        try:
            return Embedding.from_mapping(attrs, origin=node.node_id)
        except ValueError as e:
            raise TypeEvalError(str(e), node.span) from None

    def eval_Call(self, node, scope):
        embeddings: List[Embedding] = []
        for arg in node.args:
            value = self.evaluate(arg, scope)
            if isinstance(value, Embedding):
                embeddings.append(value)
            elif isinstance(value, tuple) and all(isinstance(v, Embedding) for v in value):
                embeddings.extend(value)
            else:
                raise TypeEvalError(f"call argument must be an embedding, got "
                                    f"{type_name(value)}", arg.span)
        return self.invoke(node.word, embeddings, self.env.lookup(node.word), node)

    def eval_Transform(self, node, scope):
        entity = self.evaluate(node.entity, scope)
        matrix = self.evaluate(node.matrix, scope)
        if not isinstance(entity, Entity):
            raise TypeEvalError(f"transform expects an entity, got {type_name(entity)}",
                                node.entity.span)
        if not isinstance(matrix, Matrix4):
            raise TypeEvalError(f"transform expects a matrix, got {type_name(matrix)}",
                                node.matrix.span)
        return Posed(entity, matrix)

    def _posed(self, value: Any, node: ast.Node) -> Posed:
        if not isinstance(value, Posed):
            raise TypeEvalError(f"union expects entity-transform pairs, got {type_name(value)}",
                                node.span)
        return value

    def eval_UnionForm(self, node, scope):
        return tuple([self._posed(self.evaluate(item, scope), item) for item in node.items])

    def eval_UnionLoop(self, node, scope):
        count = self.evaluate(node.count, scope)
        if isinstance(count, float) and count.is_integer():
            count = int(count)
        if not isinstance(count, int) or isinstance(count, bool):
            raise InvalidLoopError(f"loop count must be an integer, got {count!r}", node.count.span)
        if count < 0:
            raise InvalidLoopError(f"loop count must be non-negative, got {count}", node.count.span)
        children = []
        for i in range(count):
            inner = dict(scope)
            inner[node.index] = i
            children.append(self._posed(self.evaluate(node.body, inner), node.body))
        return tuple(children)

    def eval_If(self, node, scope):
        cond = self.evaluate(node.cond, scope)
        if not isinstance(cond, bool):
            raise TypeEvalError(f"if condition must be a boolean, got {type_name(cond)}",
                                node.cond.span)
        return self.evaluate(node.then if cond else node.orelse, scope)

    def eval_Apply(self, node, scope):
        if node.op in SHORT_CIRCUIT:
            want = node.op == "or"
            for arg in node.args:
                value = self.evaluate(arg, scope)
                if not isinstance(value, bool):
                    raise TypeEvalError(f"'{node.op}' expects booleans, got {type_name(value)}",
                                        arg.span)
                if value == want:
                    return want
            return not want
        if self.mode == MODE_MINECRAFT and node.op in ROTATING_BUILDERS:
            raise RotationForbiddenError(
                f"{node.span.line}:{node.span.column}: '{node.op}' is not allowed in Minecraft "
                "mode; only integer translation and positive integer scaling are supported"
                if node.span else f"'{node.op}' is not allowed in Minecraft mode")
        args = [self.evaluate(a, scope) for a in node.args]
        return IMPLEMENTATIONS[node.op](*args)


def _word_cycle(stack: List[str]) -> List[str]:
    """Tail of ``stack`` from the previous occurrence of its last word."""
    word = stack[-1]
    for i in range(len(stack) - 2, -1, -1):
        if stack[i] == word:
            return stack[i:]
    return list(stack)


@contextmanager
def recursion_headroom(depth_limit: int):
    """Raise Python's recursion limit so ``depth_limit`` nested calls fit, then restore it."""
    previous = sys.getrecursionlimit()
    wanted = min(RECURSION_CEILING, previous + depth_limit * FRAMES_PER_CALL)
    if wanted > previous:
        sys.setrecursionlimit(wanted)
    try:
        yield
    finally:
        sys.setrecursionlimit(previous)


def _report(root_word: str, frames: Sequence[Entity], warnings: List[str]) -> ExecutionReport:
    report = ExecutionReport(root_word, warnings=list(warnings))
    for frame in frames:
        for path, node in frame.walk():
            report.entity_count += 1
            report.leaf_count += node.is_leaf
            report.max_depth_reached = max(report.max_depth_reached, len(path) + 1)
    return report


def _checked(program: ast.Program) -> None:
    errors = errors_only(validate(program))
    if errors:
        raise ValidationFailed(errors)


def execute(program: ast.Program, entry: Optional[str] = None,
            depth_limit: Optional[int] = None,
            mode: str = MODE_PRIMITIVES) -> Tuple[Entity, ExecutionReport]:
    """Evaluate the root entity function; embedding ids follow DFS preorder."""
    _checked(program)
    root_word = select_root(program, entry)
    logger.info(f"Executing root entity function \"{root_word}\"")
    interp = Interpreter(program, depth_limit, mode)
    with recursion_headroom(interp.env.depth_limit):
        root = assign_embedding_ids(interp.run_root(root_word))
    report = _report(root_word, [root], interp.warnings)
    logger.info(f"Executed \"{root_word}\": {report.entity_count} entities, "
                f"{report.leaf_count} leaves")
    return root, report


def execute_temporal(program: ast.Program, entry: Optional[str] = None,
                     depth_limit: Optional[int] = None) -> Tuple[List[Entity], ExecutionReport]:
    """Evaluate a 4D entity function to a list of frames with independent ids."""
    _checked(program)
    root_word = select_root(program, entry)
    interp = Interpreter(program, depth_limit)
    with recursion_headroom(interp.env.depth_limit):
        frames = [assign_embedding_ids(f) for f in interp.run_temporal(root_word)]
    report = _report(root_word, frames, interp.warnings)
    report.frame_count = len(frames)
    logger.info(f"Executed 4D function \"{root_word}\": {len(frames)} frame(s)")
    return frames, report


def evaluate_expr(expr: ast.Expr, scope: Optional[Dict[str, Any]] = None,
                  program: Optional[ast.Program] = None) -> Any:
    """Evaluate a standalone expression in ``scope``."""
    interp = Interpreter(program or ast.Program(()))
    return interp.evaluate(expr, dict(scope or {}))
