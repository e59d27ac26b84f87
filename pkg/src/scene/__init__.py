"""Executed scene model and structural queries."""

from .model import BlockSpec, Embedding, Entity, FlatPrimitive, PrimitiveSpec
from .queries import (
    compute_shape_center, compute_shape_max, compute_shape_min, compute_shape_sizes,
    computation_graph, correspondence_groups, flatten,
)
from .serialization import entity_from_json, entity_to_json

__all__ = [
    'BlockSpec',
    'Embedding',
    'Entity',
    'FlatPrimitive',
    'PrimitiveSpec',
    'compute_shape_center',
    'compute_shape_max',
    'compute_shape_min',
    'compute_shape_sizes',
    'computation_graph',
    'correspondence_groups',
    'flatten',
    'entity_from_json',
    'entity_to_json',
]
