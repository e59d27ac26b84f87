"""Recursive-descent parser producing the Program AST.

Source text is first read into generic S-expressions, which are then checked
against the grammar productions and converted to typed AST nodes.
"""

from dataclasses import dataclass
from typing import List, Tuple, Union

from loguru import logger

from src.core.errors import ParseError
from src.language import ast
from src.language.builtins import SIGNATURES
from src.language.lexer import LPAREN, NUMBER, RPAREN, STRING, SYMBOL, Span, Token, tokenize

SPECIAL_FORMS = ("bind", "lambda", "call", "transform", "union", "union-loop", "if", "embed")

P_START = "<START> ::= <embedding>? <bind-expr>*"
P_BIND = "<bind-expr> ::= (bind <word> <entity-func>)"
P_FUNC = "<entity-func> ::= (lambda (embedding embedding-list) <sub-entities>)"
P_FUNC4D = "<4D-entity-func> ::= (lambda () <create-entity-list>)"
P_SUB = "<sub-entities> ::= (union <entity-transform>*) | (union-loop <loop-count> (lambda (i) <entity-transform>))"
P_TRANSFORM = "<entity-transform> ::= (transform <entity> <matrix>)"
P_CALL = "<entity> ::= (call <word> <embedding>*)"
P_LIST4D = "<create-entity-list> ::= (list <entity>*)"
P_EMBED = "<embedding> ::= (embed (<key> <value>+)*)"


@dataclass(frozen=True)
class SList:
    items: Tuple["SExpr", ...]
    span: Span


SExpr = Union[Token, SList]


def read(tokens: List[Token]) -> List[SExpr]:
    """Group tokens into nested S-expressions."""
    stack: List[Tuple[Token, List[SExpr]]] = []
    top: List[SExpr] = []
    for tok in tokens:
        if tok.kind == LPAREN:
            stack.append((tok, []))
        elif tok.kind == RPAREN:
            if not stack:
                raise ParseError("unexpected ')'", tok.span)
            opener, items = stack.pop()
            node = SList(tuple(items), opener.span.merge(tok.span))
            (stack[-1][1] if stack else top).append(node)
        else:
            (stack[-1][1] if stack else top).append(tok)
    if stack:
        raise ParseError("unclosed '('", stack[-1][0].span)
    return top


def _span(sx: SExpr) -> Span:
    return sx.span


def _head(sx: SExpr) -> str:
    if isinstance(sx, SList) and sx.items and isinstance(sx.items[0], Token) \
            and sx.items[0].kind == SYMBOL:
        return sx.items[0].value
    return ""


class _Builder:
    def __init__(self):
        self.next_id = 0

    def _id(self) -> int:
        self.next_id += 1
        return self.next_id

    def _fail(self, message: str, production: str, sx: SExpr):
        raise ParseError(f"{message} [{production}]", _span(sx))

    # Top level

    def program(self, forms: List[SExpr], filename: str) -> ast.Program:
        pid = self._id()
        root_embedding = None
        if forms and _head(forms[0]) == "embed":
            root_embedding = self.form_embed(forms[0])
            forms = forms[1:]
        binds = tuple(self.bind(f) for f in forms)
        heads = () if root_embedding is None else (root_embedding,)
        spans = [n.span for n in heads + binds]
        span = spans[0].merge(spans[-1]) if spans else None
        return ast.Program(binds, filename, root_embedding, span=span, node_id=pid)

    def bind(self, sx: SExpr) -> ast.Bind:
        if _head(sx) == "embed":
            self._fail("the root embedding must be the first top-level form", P_START, sx)
        if _head(sx) != "bind":
            self._fail("top-level form must be a bind-expr", P_START, sx)
        nid = self._id()
        items = sx.items
        if len(items) < 2 or not (isinstance(items[1], Token) and items[1].kind == STRING):
            self._fail("bind-expr requires a word given as a string literal", P_BIND, sx)
        word = items[1].value
        if not word or word != word.strip():
            self._fail(f"invalid word {word!r}", P_BIND, items[1])
        if len(items) != 3:
            self._fail("bind-expr requires an entity function", P_BIND, sx)
        return ast.Bind(word, self.func(items[2]), span=sx.span, node_id=nid)

    def func(self, sx: SExpr):
        if _head(sx) != "lambda" or len(sx.items) != 3 or not isinstance(sx.items[1], SList):
            self._fail("expected an entity function", P_FUNC, sx)
        nid = self._id()
        formals = sx.items[1].items
        if not all(isinstance(f, Token) and f.kind == SYMBOL for f in formals):
            self._fail("lambda formals must be symbols", P_FUNC, sx.items[1])
        body = sx.items[2]
        if len(formals) == 0:
            if _head(body) != "list":
                self._fail("a 4D entity function must return (list <entity>*)", P_LIST4D, body)
            frames = tuple(self.expr(item) for item in body.items[1:])
            return ast.TemporalFunc(frames, span=sx.span, node_id=nid)
        if len(formals) != 2:
            self._fail("an entity function takes exactly two formals", P_FUNC, sx.items[1])
        params = (formals[0].value, formals[1].value)
        return ast.EntityFunc(params, self.sub_entities(body), span=sx.span, node_id=nid)

    def sub_entities(self, sx: SExpr):
        head = _head(sx)
        if head in ("union", "union-loop"):
            return self.expr(sx)
        if head == "if" and len(sx.items) == 4:
            nid = self._id()
            return ast.If(self.expr(sx.items[1]), self.sub_entities(sx.items[2]),
                          self.sub_entities(sx.items[3]), span=sx.span, node_id=nid)
        self._fail("entity function body must be union or union-loop", P_SUB, sx)

    # Expressions

    def expr(self, sx: SExpr) -> ast.Expr:
        if isinstance(sx, Token):
            nid = self._id()
            if sx.kind == NUMBER:
                return ast.Num(sx.value, span=sx.span, node_id=nid)
            if sx.kind == STRING:
                return ast.Str(sx.value, span=sx.span, node_id=nid)
            return ast.Var(sx.value, span=sx.span, node_id=nid)

        head = _head(sx)
        if not head:
            self._fail("expression lists must start with an operator symbol", P_SUB, sx)
        method = getattr(self, "form_" + head.replace("-", "_"), None)
        if head in SPECIAL_FORMS and method is not None:
            return method(sx)
        if head in SIGNATURES:
            return self.apply(head, sx)
        if head in ("bind", "lambda"):
            self._fail(f"'{head}' is not allowed here", P_BIND, sx)
        self._fail(f"unknown form '{head}'", P_SUB, sx)

    def apply(self, op: str, sx: SList) -> ast.Apply:
        sig = SIGNATURES[op]
        n = len(sx.items) - 1
        if n < sig.min_args or (sig.max_args is not None and n > sig.max_args):
            bound = sig.min_args if sig.max_args == sig.min_args else \
                f"{sig.min_args}..{sig.max_args if sig.max_args is not None else ''}"
            self._fail(f"'{op}' takes {bound} argument(s), got {n}", f"({op} ...)", sx)
        nid = self._id()
        return ast.Apply(op, tuple(self.expr(a) for a in sx.items[1:]), span=sx.span, node_id=nid)

    def form_call(self, sx: SList) -> ast.Call:
        items = sx.items
        if len(items) < 2 or not (isinstance(items[1], Token) and items[1].kind == STRING):
            self._fail("call requires a word given as a string literal", P_CALL, sx)
        nid = self._id()
        return ast.Call(items[1].value, tuple(self.expr(a) for a in items[2:]),
                        span=sx.span, node_id=nid)

    def form_transform(self, sx: SList) -> ast.Transform:
        if len(sx.items) != 3:
            self._fail("transform takes an entity and a matrix", P_TRANSFORM, sx)
        nid = self._id()
        return ast.Transform(self.expr(sx.items[1]), self.expr(sx.items[2]),
                             span=sx.span, node_id=nid)

    def form_union(self, sx: SList) -> ast.UnionForm:
        nid = self._id()
        return ast.UnionForm(tuple(self.expr(a) for a in sx.items[1:]), span=sx.span, node_id=nid)

    def form_union_loop(self, sx: SList) -> ast.UnionLoop:
        if len(sx.items) != 3:
            self._fail("union-loop takes a loop count and a loop function", P_SUB, sx)
        fn = sx.items[2]
        if (_head(fn) != "lambda" or len(fn.items) != 3 or not isinstance(fn.items[1], SList)
                or len(fn.items[1].items) != 1 or not isinstance(fn.items[1].items[0], Token)
                or fn.items[1].items[0].kind != SYMBOL):
            self._fail("union-loop body must be (lambda (i) <entity-transform>)", P_SUB, fn)
        nid = self._id()
        count = self.expr(sx.items[1])
        return ast.UnionLoop(count, fn.items[1].items[0].value, self.expr(fn.items[2]),
                             span=sx.span, node_id=nid)

    def form_if(self, sx: SList) -> ast.If:
        if len(sx.items) != 4:
            self._fail("if takes a condition and two branches", "(if <cond> <then> <else>)", sx)
        nid = self._id()
        return ast.If(self.expr(sx.items[1]), self.expr(sx.items[2]), self.expr(sx.items[3]),
                      span=sx.span, node_id=nid)

    def form_embed(self, sx: SList) -> ast.Embed:
        nid = self._id()
        entries = []
        seen = set()
        for entry in sx.items[1:]:
            if not (isinstance(entry, SList) and len(entry.items) >= 2
                    and isinstance(entry.items[0], Token) and entry.items[0].kind == SYMBOL):
                self._fail("embedding entries are (<key> <value>+)", P_EMBED, entry)
            key = entry.items[0].value
            if key in seen:
                self._fail(f"duplicate embedding key '{key}'", P_EMBED, entry)
            seen.add(key)
            eid = self._id()
            entries.append(ast.EmbedEntry(key, tuple(self.expr(v) for v in entry.items[1:]),
                                          span=entry.span, node_id=eid))
        return ast.Embed(tuple(entries), span=sx.span, node_id=nid)


def parse(text: str, filename: str = "<input>") -> ast.Program:
    """Parse a whole program: an optional root embedding, then zero or more bind-exprs."""
    program = _Builder().program(read(tokenize(text)), filename)
    logger.debug(f"Parsed {filename}: {len(program.binds)} bind(s)")
    return program


def parse_expr(text: str) -> ast.Expr:
    """Parse a single expression (used for evaluation and by tests)."""
    forms = read(tokenize(text))
    if len(forms) != 1:
        raise ParseError(f"expected exactly one expression, got {len(forms)}")
    return _Builder().expr(forms[0])


def parse_entity_func(text: str):
    """Parse a standalone ``(lambda ...)`` entity function."""
    forms = read(tokenize(text))
    if len(forms) != 1:
        raise ParseError(f"expected exactly one entity function, got {len(forms)}")
    return _Builder().func(forms[0])
