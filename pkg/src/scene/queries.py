"""Structural queries over executed entity trees."""

from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from loguru import logger

from src.core.errors import EmptyEntityError
from src.core.transforms import IDENTITY, Matrix4, Vector3, matmul
from src.scene.model import BlockSpec, Entity, FlatPrimitive, Primitive

Path = Tuple[int, ...]
AABB = Tuple[np.ndarray, np.ndarray]


def assign_embedding_ids(root: Entity) -> Entity:
    """Return a copy of ``root`` whose embeddings carry 1-based preorder ids."""
    counter = [0]

    def visit(node: Entity) -> Entity:
        counter[0] += 1
        embedding = node.embedding.with_id(counter[0])
        children = tuple((visit(child), pose) for child, pose in node.children)
        return Entity(node.word, embedding, children, node.primitive)

    return visit(root)


def _structural_ids(root: Entity) -> Dict[Path, int]:
    """Map every path to a canonical id of its subtree structure (own pose excluded)."""
    interned: Dict[tuple, int] = {}
    by_path: Dict[Path, int] = {}

    def visit(node: Entity, path: Path) -> int:
        child_keys = tuple(
            (visit(child, path + (i,)), pose.m.tobytes())
            for i, (child, pose) in enumerate(node.children)
        )
        key = (node.word, node.embedding.attr_key(), node.primitive, child_keys)
        sid = interned.setdefault(key, len(interned))
        by_path[path] = sid
        return sid

    visit(root, ())
    return by_path


def _group_ids(root: Entity) -> Dict[Path, int]:
    """Group ids (1-based, by first preorder occurrence) for every path."""
    structural = _structural_ids(root)
    first_seen: Dict[int, int] = {}
    groups: Dict[Path, int] = {}
    for path, _ in root.walk():
        sid = structural[path]
        groups[path] = first_seen.setdefault(sid, len(first_seen) + 1)
    return groups


def correspondence_groups(root: Entity) -> Dict[int, List[Path]]:
    """Group entity paths that are identical up to their own pose.

    Groups with two or more members are repeated instances. Group ids follow
    first occurrence in preorder, starting at 1.
    """
    grouped: Dict[int, List[Path]] = {}
    for path, gid in _group_ids(root).items():
        grouped.setdefault(gid, []).append(path)
    return dict(sorted(grouped.items()))


def repeated_groups(root: Entity) -> Dict[int, List[Path]]:
    """Correspondence groups with at least two members."""
    return {gid: paths for gid, paths in correspondence_groups(root).items() if len(paths) > 1}


def flatten(root: Entity) -> List[FlatPrimitive]:
    """Depth-first, left-to-right list of leaves with world poses.

    The world pose of a leaf is the product of the poses along its path,
    outermost first; the root's own frame is the identity.
    """
    groups = _group_ids(root)
    prims: List[FlatPrimitive] = []
    preorder_id = 0
    stack: List[Tuple[Path, Entity, Matrix4]] = [((), root, IDENTITY)]
    while stack:
        path, node, world = stack.pop()
        preorder_id += 1
        if node.primitive is not None:
            prims.append(FlatPrimitive(node.primitive, world, path, node.word,
                                       preorder_id, groups[path]))
            continue
        for i in range(len(node.children) - 1, -1, -1):
            child, pose = node.children[i]
            stack.append((path + (i,), child, matmul(world, pose)))
    return prims


def _local_aabb(spec: Primitive) -> AABB:
    if isinstance(spec, BlockSpec):
        return np.zeros(3), np.array(spec.size, dtype=np.float64)
    if spec.kind == "cube":
        half = np.array(spec.size) / 2.0
        return -half, half
    if spec.kind == "sphere":
        r = np.full(3, spec.radius)
        return -r, r
    p0, p1 = np.array(spec.p0), np.array(spec.p1)
    axis = (p1 - p0) / np.linalg.norm(p1 - p0)
    extent = spec.radius * np.sqrt(np.clip(1.0 - axis * axis, 0.0, None))
    return np.minimum(p0, p1) - extent, np.maximum(p0, p1) + extent


def aabb_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])
                     for z in (lo[2], hi[2])])


def primitive_world_aabb(spec: Primitive, world: Matrix4) -> AABB:
    """World-frame AABB: exact for spheres, mapped local corners otherwise."""
    if not isinstance(spec, BlockSpec) and spec.kind == "sphere":
        center = world.m[:3, 3]
        extent = spec.radius * np.linalg.norm(world.linear, axis=1)
        return center - extent, center + extent
    corners = aabb_corners(*_local_aabb(spec)) @ world.linear.T + world.m[:3, 3]
    return corners.min(axis=0), corners.max(axis=0)


def prims_aabb(prims: Sequence[FlatPrimitive]) -> Optional[AABB]:
    """Union of the world AABBs of ``prims``; None for an empty list."""
    if not prims:
        return None
    boxes = [primitive_world_aabb(p.spec, p.world) for p in prims]
    lo = np.min([b[0] for b in boxes], axis=0)
    hi = np.max([b[1] for b in boxes], axis=0)
    return lo, hi


def _entity_aabb(e: Entity) -> AABB:
    box = prims_aabb(flatten(e))
    if box is None:
        raise EmptyEntityError(f"entity '{e.word}' has no leaf primitives")
    return box


def compute_shape_min(e: Entity) -> Vector3:
    """Minimum corner of the world AABB of every leaf under ``e``."""
    lo, _ = _entity_aabb(e)
    return Vector3(*(float(v) for v in lo))


def compute_shape_max(e: Entity) -> Vector3:
    """Maximum corner, see compute_shape_min."""
    _, hi = _entity_aabb(e)
    return Vector3(*(float(v) for v in hi))


def compute_shape_center(e: Entity) -> Vector3:
    """AABB midpoint."""
    lo, hi = compute_shape_min(e), compute_shape_max(e)
    return Vector3(*((a + b) / 2 for a, b in zip(lo, hi)))


def compute_shape_sizes(e: Entity) -> Vector3:
    """Per-axis AABB extent."""
    lo, hi = compute_shape_min(e), compute_shape_max(e)
    return Vector3(*(b - a for a, b in zip(lo, hi)))


def node_label(node: Entity) -> str:
    return f"{node.word}#{node.embedding.id if node.embedding.id is not None else '?'}"


def computation_graph(root: Entity) -> nx.DiGraph:
    """One node per entity instance (keyed by path), one edge per child entry."""
    graph = nx.DiGraph()
    for path, node in root.walk():
        graph.add_node(path, label=node_label(node), word=node.word)
        if path:
            graph.add_edge(path[:-1], path)
    logger.debug(f"Computation graph: {graph.number_of_nodes()} nodes, "
                 f"{graph.number_of_edges()} edges")
    return graph


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(graph: nx.DiGraph, name: str = "scene") -> str:
    lines = [f"digraph {_dot_id(name)} {{"]
    for node, data in graph.nodes(data=True):
        lines.append(f"  {_dot_id(data['label'])};")
    for src, dst in graph.edges():
        lines.append(f"  {_dot_id(graph.nodes[src]['label'])} -> "
                     f"{_dot_id(graph.nodes[dst]['label'])};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def temporal_tracks(frames: Sequence[Entity]) -> Dict[Path, List[Optional[Vector3]]]:
    """World-space centre of every leaf path in every frame (None where absent)."""
    tracks: Dict[Path, List[Optional[Vector3]]] = {}
    for t, frame in enumerate(frames):
        for prim in flatten(frame):
            track = tracks.setdefault(prim.path, [None] * len(frames))
            track[t] = prim.world_center
    return tracks
