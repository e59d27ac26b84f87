"""Executed-scene data model: embeddings, primitives and entity trees."""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterator, Mapping, Optional, Tuple, Union

from src.core.errors import InvalidArgumentError, PrimitiveSpecError
from src.core.transforms import Matrix4, Vector3, apply_point

AttrValue = Union[float, Tuple[float, ...], str]

PRIMITIVE_KINDS = ("cube", "sphere", "cylinder")
DEFAULT_COLOR = (0.8, 0.8, 0.8)


def canonical_attr(key: str, value: Any) -> AttrValue:
    """Normalize an attribute value to float / tuple of floats / str."""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return 1.0 if value else 0.0
    if isinstance(value, (int, float)):
        number = float(value)
        if not math.isfinite(number):
            raise InvalidArgumentError(f"attribute '{key}' is not finite")
        return number
    if isinstance(value, (tuple, list, Vector3)):
        items = tuple(float(v) for v in value)
        if not 2 <= len(items) <= 4:
            raise InvalidArgumentError(
                f"attribute '{key}' vectors need 2-4 components, got {len(items)}")
        if not all(math.isfinite(v) for v in items):
            raise InvalidArgumentError(f"attribute '{key}' is not finite")
        return items
    raise InvalidArgumentError(f"attribute '{key}' has unsupported value {value!r}")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Attribute record standing in for a per-entity embedding.

    ``origin`` is the AST node id of the ``embed`` literal that produced the
    record; it is provenance only and takes no part in equality.
    """

    items: Tuple[Tuple[str, AttrValue], ...] = ()
    id: Optional[int] = None
    origin: Optional[int] = None

    @classmethod
    def from_mapping(cls, attrs: Mapping[str, Any], origin: Optional[int] = None,
                     id: Optional[int] = None) -> "Embedding":
        return cls(tuple((str(k), canonical_attr(str(k), v)) for k, v in attrs.items()),
                   id=id, origin=origin)

    @property
    def attrs(self) -> Dict[str, AttrValue]:
        return dict(self.items)

    def get(self, key: str, default: Any = None) -> Any:
        for k, v in self.items:
            if k == key:
                return v
        return default

    def __contains__(self, key: str) -> bool:
        return any(k == key for k, _ in self.items)

    def merged(self, other: "Embedding") -> "Embedding":
        """Attrs of ``self`` overridden by ``other``; provenance follows ``other``."""
        attrs = self.attrs
        attrs.update(other.attrs)
        return Embedding(tuple(attrs.items()), origin=other.origin if other.origin is not None
                         else self.origin)

    def with_id(self, id: Optional[int]) -> "Embedding":
        return replace(self, id=id)

    def attr_key(self) -> Tuple[Tuple[str, AttrValue], ...]:
        return tuple(sorted(self.items, key=lambda kv: kv[0]))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Embedding) and self.items == other.items
                and self.id == other.id)

    def __hash__(self) -> int:
        return hash((self.items, self.id))


EMPTY_EMBEDDING = Embedding()


def _color(attrs: Embedding, default: Tuple[float, float, float]) -> Tuple[float, float, float]:
    color = attrs.get("color", default)
    if isinstance(color, str) or not isinstance(color, tuple) or len(color) != 3:
        raise PrimitiveSpecError(f"'color' must be an RGB triple, got {color!r}")
    if not all(0.0 <= c <= 1.0 for c in color):
        raise PrimitiveSpecError(f"'color' components must lie in [0, 1], got {color}")
    return color


def _positive_number(attrs: Embedding, key: str) -> float:
    value = attrs.get(key)
    if not isinstance(value, float) or value <= 0.0:
        raise PrimitiveSpecError(f"'{key}' must be a positive number, got {value!r}")
    return value


def _vector3(attrs: Embedding, key: str) -> Vector3:
    value = attrs.get(key)
    if not isinstance(value, tuple) or len(value) != 3:
        raise PrimitiveSpecError(f"'{key}' must be a 3-vector, got {value!r}")
    return Vector3(*value)


@dataclass(frozen=True)
class PrimitiveSpec:
    """Cube (centered, edge lengths ``size``), sphere (centered) or cylinder (p0-p1)."""

    kind: str
    color: Tuple[float, float, float] = DEFAULT_COLOR
    size: Optional[Vector3] = None
    radius: Optional[float] = None
    p0: Optional[Vector3] = None
    p1: Optional[Vector3] = None

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS:
            raise PrimitiveSpecError(f"unknown primitive kind {self.kind!r}")
        if self.kind == "cube":
            if self.size is None or any(s <= 0.0 for s in self.size):
                raise PrimitiveSpecError(f"cube size must be positive, got {self.size}")
        else:
            if self.radius is None or self.radius <= 0.0:
                raise PrimitiveSpecError(f"{self.kind} radius must be positive, got {self.radius}")
        if self.kind == "cylinder" and (self.p0 is None or self.p1 is None or self.p0 == self.p1):
            raise PrimitiveSpecError("cylinder endpoints p0 and p1 must differ")
        if not all(0.0 <= c <= 1.0 for c in self.color):
            raise PrimitiveSpecError(f"color components must lie in [0, 1], got {self.color}")

    @classmethod
    def from_embedding(cls, emb: Embedding,
                       default_color: Tuple[float, float, float] = DEFAULT_COLOR) -> "PrimitiveSpec":
        shape = emb.get("shape")
        if shape not in PRIMITIVE_KINDS:
            raise PrimitiveSpecError(
                f"leaf attrs need 'shape' in {PRIMITIVE_KINDS}, got {shape!r}")
        color = _color(emb, default_color)
        if shape == "cube":
            return cls("cube", color, size=_vector3(emb, "size"))
        if shape == "sphere":
            return cls("sphere", color, radius=_positive_number(emb, "radius"))
        return cls("cylinder", color, radius=_positive_number(emb, "radius"),
                   p0=_vector3(emb, "p0"), p1=_vector3(emb, "p1"))

    @property
    def local_center(self) -> Vector3:
        if self.kind == "cylinder":
            return Vector3(*((a + b) / 2.0 for a, b in zip(self.p0, self.p1)))
        return Vector3(0.0, 0.0, 0.0)

    def geometry(self) -> Dict[str, Any]:
        if self.kind == "cube":
            return {"size": list(self.size)}
        if self.kind == "sphere":
            return {"radius": self.radius}
        return {"radius": self.radius, "p0": list(self.p0), "p1": list(self.p1)}


@dataclass(frozen=True)
class BlockSpec:
    """Minecraft cuboid anchored at its front-left-bottom vertex (local origin)."""

    block: str
    size: Tuple[int, int, int]
    fill: bool = True
    delete: bool = False
    kind: str = field(default="block", init=False)

    def __post_init__(self):
        if not self.block:
            raise PrimitiveSpecError("block type must be non-empty")
        if len(self.size) != 3 or any(int(s) != s or s < 1 for s in self.size):
            raise PrimitiveSpecError(f"block size must be three positive integers, got {self.size}")

    @classmethod
    def from_embedding(cls, emb: Embedding) -> "BlockSpec":
        delete = bool(emb.get("delete", 0.0))
        block = emb.get("block", "minecraft:air" if delete else None)
        if not isinstance(block, str):
            raise PrimitiveSpecError(f"Minecraft leaf needs a 'block' string, got {block!r}")
        size = emb.get("size")
        if not isinstance(size, tuple) or len(size) != 3 or any(float(s) != int(s) for s in size):
            raise PrimitiveSpecError(f"Minecraft 'size' must be three integers, got {size!r}")
        return cls(block, tuple(int(s) for s in size), fill=bool(emb.get("fill", 1.0)),
                   delete=delete)

    @property
    def local_center(self) -> Vector3:
        return Vector3(*(s / 2.0 for s in self.size))

    @property
    def color(self) -> Optional[Tuple[float, float, float]]:
        return None

    def geometry(self) -> Dict[str, Any]:
        return {"block": self.block, "size": list(self.size), "fill": self.fill,
                "delete": self.delete}


Primitive = Union[PrimitiveSpec, BlockSpec]


@dataclass(frozen=True)
class Entity:
    """``((word, embedding), [(child, pose)])`` plus the primitive of a leaf."""

    word: str
    embedding: Embedding = EMPTY_EMBEDDING
    children: Tuple[Tuple["Entity", Matrix4], ...] = ()
    primitive: Optional[Primitive] = None

    def __post_init__(self):
        if not self.word or self.word != self.word.strip():
            raise InvalidArgumentError(f"invalid word {self.word!r}")
        if self.primitive is not None and self.children:
            raise InvalidArgumentError(f"entity '{self.word}' has both a primitive and children")

    @property
    def is_leaf(self) -> bool:
        return self.primitive is not None

    def walk(self) -> Iterator[Tuple[Tuple[int, ...], "Entity"]]:
        """Preorder traversal yielding (path, entity)."""
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((path + (i,), node.children[i][0]))

    def node_at(self, path: Tuple[int, ...]) -> "Entity":
        node = self
        for i in path:
            node = node.children[i][0]
        return node

    def pose_path(self, path: Tuple[int, ...]) -> Tuple[Matrix4, ...]:
        poses = []
        node = self
        for i in path:
            child, pose = node.children[i]
            poses.append(pose)
            node = child
        return tuple(poses)


@dataclass(frozen=True)
class FlatPrimitive:
    """A leaf primitive with its world pose and provenance."""

    spec: Primitive
    world: Matrix4
    path: Tuple[int, ...]
    word: str
    embedding_id: int
    group_id: int = 0

    @property
    def world_center(self) -> Vector3:
        return apply_point(self.world, self.spec.local_center)
