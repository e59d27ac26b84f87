"""Structural comparison of executed entity trees."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

from src.scene.model import Entity
from src.scene.serialization import primitive_to_json

Path = Tuple[int, ...]


@dataclass(frozen=True)
class DiffEntry:
    path: Path
    kind: str  # word | attrs | primitive | pose | children
    before: Any
    after: Any

    def to_json(self) -> Dict[str, Any]:
        return {"path": list(self.path), "kind": self.kind,
                "before": self.before, "after": self.after}


@dataclass
class EntityDiff:
    entries: List[DiffEntry] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def paths(self) -> List[Path]:
        seen: Dict[Path, None] = {}
        for e in self.entries:
            seen.setdefault(e.path)
        return list(seen)

    def kinds_at(self, path: Path) -> List[str]:
        return [e.kind for e in self.entries if e.path == path]

    def to_json(self) -> List[Dict[str, Any]]:
        return [e.to_json() for e in self.entries]


def diff_entities(a: Entity, b: Entity) -> EntityDiff:
    """Paths where word, attrs, primitive, child pose or child count differ.

    Embedding ids are ignored; poses are compared bitwise.
    """
    report = EntityDiff()

    def visit(x: Entity, y: Entity, path: Path) -> None:
        if x.word != y.word:
            report.entries.append(DiffEntry(path, "word", x.word, y.word))
        if x.embedding.attr_key() != y.embedding.attr_key():
            report.entries.append(DiffEntry(path, "attrs", x.embedding.attrs, y.embedding.attrs))
        if x.primitive != y.primitive:
            report.entries.append(DiffEntry(path, "primitive", primitive_to_json(x.primitive),
                                            primitive_to_json(y.primitive)))
        if len(x.children) != len(y.children):
            report.entries.append(DiffEntry(path, "children", len(x.children), len(y.children)))
        for i, ((cx, px), (cy, py)) in enumerate(zip(x.children, y.children)):
            child_path = path + (i,)
            if px != py:
                report.entries.append(DiffEntry(child_path, "pose", px.to_list(), py.to_list()))
            visit(cx, cy, child_path)

    visit(a, b, ())
    return report
