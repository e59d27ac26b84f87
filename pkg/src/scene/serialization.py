"""Entity JSON encoding with schema validation."""

import json
from typing import Any, Dict, List, Optional

import jsonschema
from loguru import logger

from src.core.errors import InvalidArgumentError
from src.core.transforms import Matrix4, Vector3
from src.scene.model import BlockSpec, Embedding, Entity, PrimitiveSpec

_NUMBER_OR_VECTOR_OR_STRING = {
    "oneOf": [
        {"type": "number"},
        {"type": "string"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 4},
    ]
}

ENTITY_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "$ref": "#/definitions/entity",
    "definitions": {
        "matrix": {"type": "array", "items": {"type": "number"}, "minItems": 16, "maxItems": 16},
        "entity": {
            "type": "object",
            "required": ["word", "embedding", "children"],
            "properties": {
                "word": {"type": "string", "minLength": 1},
                "embedding": {
                    "type": "object",
                    "required": ["attrs"],
                    "properties": {
                        "id": {"type": ["integer", "null"]},
                        "attrs": {"type": "object",
                                  "additionalProperties": _NUMBER_OR_VECTOR_OR_STRING},
                    },
                },
                "primitive": {
                    "type": "object",
                    "required": ["kind", "geometry"],
                    "properties": {
                        "kind": {"enum": ["cube", "sphere", "cylinder", "block"]},
                        "geometry": {"type": "object"},
                        "color": {"type": ["array", "null"], "items": {"type": "number"}},
                    },
                },
                "children": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["pose", "entity"],
                        "properties": {
                            "pose": {"$ref": "#/definitions/matrix"},
                            "entity": {"$ref": "#/definitions/entity"},
                        },
                    },
                },
            },
        },
    },
}


def primitive_to_json(prim) -> Optional[Dict[str, Any]]:
    if prim is None:
        return None
    return {
        "kind": prim.kind,
        "geometry": prim.geometry(),
        "color": list(prim.color) if prim.color is not None else None,
    }


def entity_to_json(entity: Entity) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "word": entity.word,
        "embedding": {
            "id": entity.embedding.id,
            "attrs": {k: list(v) if isinstance(v, tuple) else v
                      for k, v in entity.embedding.items},
        },
    }
    if entity.primitive is not None:
        out["primitive"] = primitive_to_json(entity.primitive)
    out["children"] = [{"pose": pose.to_list(), "entity": entity_to_json(child)}
                       for child, pose in entity.children]
    return out


def dumps_entity(entity: Entity, indent: int = 2) -> str:
    return json.dumps(entity_to_json(entity), indent=indent) + "\n"


def _primitive_from_json(data: Dict[str, Any]):
    geometry = data["geometry"]
    if data["kind"] == "block":
        return BlockSpec(geometry["block"], tuple(geometry["size"]),
                         fill=bool(geometry.get("fill", True)),
                         delete=bool(geometry.get("delete", False)))
    color = tuple(data.get("color") or (0.8, 0.8, 0.8))

    def vec(key):
        return Vector3(*geometry[key]) if key in geometry else None

    return PrimitiveSpec(data["kind"], color, size=vec("size"), radius=geometry.get("radius"),
                         p0=vec("p0"), p1=vec("p1"))


def _entity_from_dict(data: Dict[str, Any]) -> Entity:
    emb = data["embedding"]
    embedding = Embedding.from_mapping(emb["attrs"], id=emb.get("id"))
    children = tuple((_entity_from_dict(c["entity"]), Matrix4.from_list(c["pose"]))
                     for c in data["children"])
    primitive = _primitive_from_json(data["primitive"]) if "primitive" in data else None
    return Entity(data["word"], embedding, children, primitive)


def validate_entity_json(data: Any) -> List[str]:
    """Schema errors for an entity document (empty when valid)."""
    validator = jsonschema.Draft7Validator(ENTITY_SCHEMA)
    return [f"{'/'.join(str(p) for p in e.absolute_path)}: {e.message}"
            for e in validator.iter_errors(data)]


def entity_from_json(data: Any) -> Entity:
    errors = validate_entity_json(data)
    if errors:
        logger.debug(f"Entity JSON rejected: {errors}")
        raise InvalidArgumentError(f"invalid entity JSON: {errors[0]}")
    return _entity_from_dict(data)
