"""Static checks over a parsed Program."""

from dataclasses import dataclass
from typing import Dict, List, Optional

from src.language import ast
from src.language.builtins import CONSTANT_TYPES, NUMERIC, SIGNATURES, Ty, compatible
from src.language.lexer import Span

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    span: Optional[Span]

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR


def format_diagnostic(diag: Diagnostic, filename: str = "<input>") -> str:
    line, col = (diag.span.line, diag.span.column) if diag.span else (1, 1)
    return f"{filename}:{line}:{col}: {diag.severity}: {diag.message}"


def root_candidates(program: ast.Program) -> List[str]:
    """Bound words never called from the body of another bind."""
    referenced = set()
    for bind in program.binds:
        for call in ast.calls_in(bind.func):
            if call.word != bind.word:
                referenced.add(call.word)
    candidates: List[str] = []
    for bind in program.binds:
        if bind.word not in referenced and bind.word not in candidates:
            candidates.append(bind.word)
    return candidates


class _Checker:
    def __init__(self, program: ast.Program):
        self.program = program
        self.diagnostics: List[Diagnostic] = []
        self.temporal_words = {b.word for b in program.binds if isinstance(b.func, ast.TemporalFunc)}

    def error(self, code: str, message: str, node: ast.Node):
        self.diagnostics.append(Diagnostic(ERROR, code, message, node.span))

    def expect(self, actual: str, expected, node: ast.Node, what: str):
        if not compatible(actual, expected):
            self.error("type", f"{what} expects {' or '.join(expected)}, got {actual}", node)

    def run(self) -> List[Diagnostic]:
        if self.program.root_embedding is not None:
            # evaluated outside any function: no formals in scope
            self.infer(self.program.root_embedding, {})
        seen: Dict[str, ast.Bind] = {}
        for bind in self.program.binds:
            if bind.word in seen:
                self.error("duplicate-bind", f'word "{bind.word}" is bound more than once', bind)
            else:
                seen[bind.word] = bind
            self.check_func(bind.func)

        if self.program.binds and not root_candidates(self.program):
            self.error("no-root", "no root entity function: every bound word is called by "
                       "another bind", self.program.binds[0])
        return self.diagnostics

    def check_func(self, func):
        if isinstance(func, ast.EntityFunc):
            z, zs = func.params
            if z == zs:
                self.error("formals", "entity function formals must differ", func)
            self.check_sub(func.body, {z: Ty.EMB, zs: Ty.EMBLIST})
        else:
            for frame in func.frames:
                self.expect(self.infer(frame, {}), (Ty.ENTITY,), frame, "create-entity-list")

    def check_sub(self, node, scope):
        ty = self.infer(node, scope)
        self.expect(ty, (Ty.CHILDREN,), node, "entity function body")

    def infer(self, node: ast.Node, scope: Dict[str, str]) -> str:
        method = getattr(self, "infer_" + type(node).__name__)
        return method(node, scope)

    def infer_Num(self, node, scope):
        return Ty.INT if isinstance(node.value, int) else Ty.NUM

    def infer_Str(self, node, scope):
        return Ty.STR

    def infer_Var(self, node, scope):
        if node.name in scope:
            return scope[node.name]
        if node.name in CONSTANT_TYPES:
            return CONSTANT_TYPES[node.name]
        self.error("unbound-variable", f"variable '{node.name}' is not a formal parameter "
                   "or loop index", node)
        return Ty.ANY

    def infer_Embed(self, node, scope):
        for entry in node.entries:
            types = [self.infer(v, scope) for v in entry.values]
            if len(types) > 1:
                for v, t in zip(entry.values, types):
                    self.expect(t, NUMERIC, v, f"vector attribute '{entry.key}'")
                if len(types) > 4:
                    self.error("type", f"attribute '{entry.key}' has more than 4 components", entry)
            else:
                self.expect(types[0], (Ty.NUM, Ty.STR, Ty.VEC, Ty.BOOL), entry.values[0],
                            f"attribute '{entry.key}'")
        return Ty.EMB

    def infer_Call(self, node, scope):
        if node.word in self.temporal_words:
            self.error("type", f'"{node.word}" is a 4D entity function and cannot be called',
                       node)
        for arg in node.args:
            self.expect(self.infer(arg, scope), (Ty.EMB, Ty.EMBLIST), arg, "call argument")
        return Ty.ENTITY

    def infer_Transform(self, node, scope):
        self.expect(self.infer(node.entity, scope), (Ty.ENTITY,), node.entity,
                    "transform's first argument")
        self.expect(self.infer(node.matrix, scope), (Ty.MATRIX,), node.matrix,
                    "transform's second argument")
        return Ty.POSED

    def infer_UnionForm(self, node, scope):
        for item in node.items:
            self.expect(self.infer(item, scope), (Ty.POSED,), item, "union")
        return Ty.CHILDREN

    def infer_UnionLoop(self, node, scope):
        count = self.infer(node.count, scope)
        if count == Ty.NUM:
            self.error("loop-count", "loop count must be an integer expression", node.count)
        else:
            self.expect(count, (Ty.INT,), node.count, "loop count")
        inner = dict(scope)
        inner[node.index] = Ty.INT
        self.expect(self.infer(node.body, inner), (Ty.POSED,), node.body, "union-loop body")
        return Ty.CHILDREN

    def infer_If(self, node, scope):
        self.expect(self.infer(node.cond, scope), (Ty.BOOL,), node.cond, "if condition")
        a, b = self.infer(node.then, scope), self.infer(node.orelse, scope)
        if a == b:
            return a
        if {a, b} <= set(NUMERIC):
            return Ty.NUM
        if Ty.ANY in (a, b):
            return b if a == Ty.ANY else a
        self.error("type", f"if branches have different types: {a} and {b}", node)
        return Ty.ANY

    def infer_Apply(self, node, scope):
        sig = SIGNATURES[node.op]
        types = [self.infer(a, scope) for a in node.args]
        for i, (arg, ty) in enumerate(zip(node.args, types)):
            self.expect(ty, sig.expected(i), arg, f"'{node.op}' argument {i + 1}")
        return sig.result(types)


def validate(program: ast.Program) -> List[Diagnostic]:
    """Diagnostics for ``program``; an empty list means it is valid."""
    return _Checker(program).run()


def errors_only(diagnostics: List[Diagnostic]) -> List[Diagnostic]:
    return [d for d in diagnostics if d.is_error]
