"""Program AST. Spans and node ids are excluded from structural equality."""

from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple, Union

from src.language.lexer import Span


@dataclass(frozen=True)
class Node:
    span: Optional[Span] = field(default=None, compare=False, repr=False, kw_only=True)
    node_id: int = field(default=-1, compare=False, repr=False, kw_only=True)

    def children(self) -> Tuple["Node", ...]:
        return ()


@dataclass(frozen=True)
class Num(Node):
    value: Union[int, float]


@dataclass(frozen=True)
class Str(Node):
    value: str


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class EmbedEntry(Node):
    key: str
    values: Tuple["Expr", ...]

    def children(self):
        return self.values


@dataclass(frozen=True)
class Embed(Node):
    """``(embed (key value+)*)``; the node id is the embedding's provenance."""

    entries: Tuple[EmbedEntry, ...]

    def children(self):
        return self.entries

    def keys(self) -> Tuple[str, ...]:
        return tuple(e.key for e in self.entries)


@dataclass(frozen=True)
class Call(Node):
    word: str
    args: Tuple["Expr", ...]

    def children(self):
        return self.args


@dataclass(frozen=True)
class Transform(Node):
    entity: "Expr"
    matrix: "Expr"

    def children(self):
        return (self.entity, self.matrix)


@dataclass(frozen=True)
class UnionForm(Node):
    items: Tuple["Expr", ...]

    def children(self):
        return self.items


@dataclass(frozen=True)
class UnionLoop(Node):
    count: "Expr"
    index: str
    body: "Expr"

    def children(self):
        return (self.count, self.body)


@dataclass(frozen=True)
class If(Node):
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"

    def children(self):
        return (self.cond, self.then, self.orelse)


@dataclass(frozen=True)
class Apply(Node):
    """Builtin operator application (arithmetic, matrices, list ops, ...)."""

    op: str
    args: Tuple["Expr", ...]

    def children(self):
        return self.args


Expr = Union[Num, Str, Var, Embed, Call, Transform, UnionForm, UnionLoop, If, Apply]


@dataclass(frozen=True)
class EntityFunc(Node):
    params: Tuple[str, str]
    body: Expr

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class TemporalFunc(Node):
    frames: Tuple[Expr, ...]

    def children(self):
        return self.frames


@dataclass(frozen=True)
class Bind(Node):
    word: str
    func: Union[EntityFunc, TemporalFunc]

    def children(self):
        return (self.func,)


@dataclass(frozen=True)
class Program(Node):
    """Top-level binds, optionally preceded by the embedding passed to the root."""

    binds: Tuple[Bind, ...]
    filename: str = field(default="<input>", compare=False)
    root_embedding: Optional[Embed] = None

    def children(self):
        if self.root_embedding is None:
            return self.binds
        return (self.root_embedding,) + self.binds

    @property
    def words(self) -> Tuple[str, ...]:
        """Bound words plus every word referenced by ``call``."""
        seen: Dict[str, None] = {}
        for bind in self.binds:
            seen.setdefault(bind.word)
        for node in walk(self):
            if isinstance(node, Call):
                seen.setdefault(node.word)
        return tuple(seen)

    def bind_for(self, word: str) -> Optional[Bind]:
        for bind in self.binds:
            if bind.word == word:
                return bind
        return None

    @property
    def source_map(self) -> Dict[int, Span]:
        return {n.node_id: n.span for n in walk(self) if n.span is not None}


def walk(node: Node) -> Iterator[Node]:
    """Preorder traversal of the AST."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(current.children()))


def calls_in(node: Node) -> Iterator[Call]:
    for n in walk(node):
        if isinstance(n, Call):
            yield n
