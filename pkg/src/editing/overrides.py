"""Attribute overrides applied to embedding literals of a program."""

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple, Union

import jsonschema
from loguru import logger

from src.core.errors import ArtifactIOError, NoTargetError, OverrideFormatError, PatchTypeError
from src.language import ast
from src.language.interpreter import MODE_PRIMITIVES, execute
from src.language.parser import parse
from src.language.printer import pretty_print
from src.scene.model import Entity, canonical_attr

SELECTORS = ("by_word", "by_path", "by_embedding_id")

# patch key for a root embedding the program does not write yet
NEW_ROOT_EMBEDDING = 0

# attrs with a fixed expected shape: number of components, or "str"
KNOWN_SHAPES: Dict[str, Union[int, str]] = {
    "shape": "str",
    "block": "str",
    "color": 3,
    "size": 3,
    "p0": 3,
    "p1": 3,
    "radius": 1,
    "fill": 1,
    "delete": 1,
}


@dataclass(frozen=True)
class OverrideSpec:
    selector: str
    target: Any
    set: Tuple[Tuple[str, Any], ...] = ()
    unset: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.selector not in SELECTORS:
            raise OverrideFormatError(f"unknown selector '{self.selector}'; "
                                      f"expected one of {SELECTORS}")
        if self.selector == "by_path":
            object.__setattr__(self, "target", tuple(self.target))

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "OverrideSpec":
        selector, target = next(iter(data["selector"].items()))
        return cls(selector, target, tuple(sorted(data.get("set", {}).items())),
                   tuple(data.get("unset", ())))

    def matches(self, path: Tuple[int, ...], node: Entity) -> bool:
        if self.selector == "by_word":
            return node.word == self.target
        if self.selector == "by_path":
            return path == self.target
        return node.embedding.id == self.target

    def describe(self) -> str:
        return f"{self.selector}={self.target!r}"


class OverrideValidator:
    """Validates override documents: JSON schema first, then patch shapes."""

    def __init__(self):
        self.schema = self._get_schema()

    def _get_schema(self) -> Dict[str, Any]:
        value = {
            "oneOf": [
                {"type": "number"},
                {"type": "boolean"},
                {"type": "string"},
                {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 4},
            ]
        }
        return {
            "$schema": "http://json-schema.org/draft-07/schema#",
            "type": "array",
            "items": {
                "type": "object",
                "required": ["selector"],
                "additionalProperties": False,
                "properties": {
                    "selector": {
                        "type": "object",
                        "minProperties": 1,
                        "maxProperties": 1,
                        "additionalProperties": False,
                        "properties": {
                            "by_word": {"type": "string", "minLength": 1},
                            "by_path": {"type": "array",
                                        "items": {"type": "integer", "minimum": 0}},
                            "by_embedding_id": {"type": "integer", "minimum": 1},
                        },
                    },
                    "set": {"type": "object", "additionalProperties": value},
                    "unset": {"type": "array", "items": {"type": "string"}},
                },
            },
        }

    def validate(self, data: Any) -> List[OverrideSpec]:
        try:
            jsonschema.validate(data, self.schema)
        except jsonschema.ValidationError as e:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise OverrideFormatError(f"invalid overrides at {where}: {e.message}") from e
        specs = [OverrideSpec.from_json(item) for item in data]
        for spec in specs:
            for key, value in spec.set:
                check_patch_value(key, value)
        return specs


def check_patch_value(key: str, value: Any) -> Any:
    """Canonical attr value for ``key``; raises PatchTypeError on a shape mismatch."""
    try:
        canonical = canonical_attr(key, value)
    except (TypeError, ValueError) as e:
        raise PatchTypeError(f"bad value for '{key}': {e}") from None
    expected = KNOWN_SHAPES.get(key)
    if expected == "str" and not isinstance(canonical, str):
        raise PatchTypeError(f"'{key}' expects a string, got {value!r}")
    if isinstance(expected, int):
        width = 1 if isinstance(canonical, float) else (
            len(canonical) if isinstance(canonical, tuple) else 0)
        if width != expected:
            raise PatchTypeError(f"'{key}' expects {expected} component(s), got {value!r}")
    return canonical


def load_overrides(source: Union[str, Path, Sequence[Any]]) -> List[OverrideSpec]:
    """Read an overrides JSON file (or an already-decoded list)."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ArtifactIOError(source, str(e)) from e
        except json.JSONDecodeError as e:
            raise OverrideFormatError(f"{source}: invalid JSON: {e}") from e
    else:
        data = list(source)
    return OverrideValidator().validate(data)


def _literal(value: Any) -> Tuple[ast.Expr, ...]:
    if isinstance(value, str):
        return (ast.Str(value),)
    if isinstance(value, tuple):
        return tuple(ast.Num(v) for v in value)
    return (ast.Num(value),)


def _patched_embed(node: ast.Embed, changes: Dict[str, Any], drops: Set[str]) -> ast.Embed:
    entries = []
    seen = set()
    for entry in node.entries:
        if entry.key in drops and entry.key not in changes:
            continue
        if entry.key in changes:
            entry = dataclasses.replace(entry, values=_literal(changes[entry.key]))
        seen.add(entry.key)
        entries.append(entry)
    for key, value in changes.items():
        if key not in seen:
            entries.append(ast.EmbedEntry(key, _literal(value)))
    return dataclasses.replace(node, entries=tuple(entries))


def _rewrite(node: ast.Node, patches: Dict[int, Tuple[Dict[str, Any], Set[str]]]) -> ast.Node:
    changes = {}
    for f in dataclasses.fields(node):
        value = getattr(node, f.name)
        if isinstance(value, ast.Node):
            new = _rewrite(value, patches)
        elif isinstance(value, tuple) and value and all(isinstance(v, ast.Node) for v in value):
            new = tuple(_rewrite(v, patches) for v in value)
        else:
            continue
        if new is not value:
            changes[f.name] = new
    if changes:
        node = dataclasses.replace(node, **changes)
    if isinstance(node, ast.Embed) and node.node_id in patches:
        node = _patched_embed(node, *patches[node.node_id])
    return node


def resolve_literals(root: Entity, spec: OverrideSpec) -> Set[int]:
    """Node ids of the embedding literals behind the entities ``spec`` selects.

    A selected root without a literal resolves to ``NEW_ROOT_EMBEDDING``.
    """
    selected = [(path, node) for path, node in root.walk() if spec.matches(path, node)]
    if not selected:
        raise NoTargetError(f"override {spec.describe()} matches no entity")
    origins = set()
    for path, node in selected:
        if node.embedding.origin is not None:
            origins.add(node.embedding.origin)
        elif path == ():
            origins.add(NEW_ROOT_EMBEDDING)
    if not origins:
        raise NoTargetError(f"override {spec.describe()} selects entities called without an "
                            "embedding literal")

    selected_paths = {path for path, _ in selected}
    shared = [path for path, node in root.walk()
              if node.embedding.origin in origins and path not in selected_paths]
    if shared:
        logger.warning(f"override {spec.describe()} also changes {len(shared)} other "
                       "instance(s) built from the same embedding literal")
    return origins


def apply_overrides(program: ast.Program, overrides: Sequence[OverrideSpec],
                    entry: Optional[str] = None, depth_limit: Optional[int] = None,
                    mode: str = MODE_PRIMITIVES) -> ast.Program:
    """Patch the embedding literals selected by ``overrides``; structure is unchanged.

    Selecting the root patches the program's root embedding, adding one if absent.

    Every selector is resolved against one execution of the unmodified program
    before anything is patched, so a failing selector leaves no partial edit.
    """
    if not overrides:
        return program
    root, _ = execute(program, entry, depth_limit, mode)

    patches: Dict[int, Tuple[Dict[str, Any], Set[str]]] = {}
    for spec in overrides:
        changes = {key: check_patch_value(key, value) for key, value in spec.set}
        for origin in sorted(resolve_literals(root, spec)):
            sets, drops = patches.setdefault(origin, ({}, set()))
            for key in spec.unset:
                sets.pop(key, None)
                drops.add(key)
            sets.update(changes)

    literal_count = len(patches)
    new_root = patches.pop(NEW_ROOT_EMBEDDING, None)
    edited = _rewrite(program, patches)
    if new_root is not None:
        edited = dataclasses.replace(
            edited, root_embedding=_patched_embed(ast.Embed(()), *new_root))
    logger.info(f"Applied {len(overrides)} override(s) to {literal_count} embedding literal(s)")
    # renumber node ids so provenance stays unique after the rewrite
    return parse(pretty_print(edited), program.filename)
