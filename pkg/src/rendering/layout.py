"""2D layout projection and automatic camera framing."""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.core.config import CameraSettings, get_config
from src.rendering.camera import Camera, Projection
from src.scene.model import FlatPrimitive
from src.scene.queries import aabb_corners, prims_aabb, primitive_world_aabb

Rect = Tuple[float, float, float, float]


@dataclass(frozen=True)
class LayoutBox:
    label: str
    embedding_id: int
    rect: Rect

    def to_json(self) -> Dict[str, Any]:
        return {"label": self.label, "embedding_id": self.embedding_id, "rect": list(self.rect)}


def project_layout(prims: Sequence[FlatPrimitive], camera: Camera,
                   near: float = 1e-6) -> List[LayoutBox]:
    """Project each primitive's world AABB into normalized image coordinates."""
    boxes: List[LayoutBox] = []
    for prim in sorted(prims, key=lambda p: p.embedding_id):
        lo, hi = primitive_world_aabb(prim.spec, prim.world)
        uv, depth = camera.project(aabb_corners(lo, hi))
        front = depth > near
        if not front.any():
            logger.warning(f"Primitive {prim.word}#{prim.embedding_id} is behind the camera; "
                           "omitted from layout")
            continue
        uv = np.clip(uv[front], 0.0, 1.0)
        x0, y0 = uv.min(axis=0)
        x1, y1 = uv.max(axis=0)
        boxes.append(LayoutBox(prim.word, prim.embedding_id,
                               (float(x0), float(y0), float(x1), float(y1))))
    return boxes


def auto_camera(prims: Sequence[FlatPrimitive], settings: Optional[CameraSettings] = None,
                width: Optional[int] = None, height: Optional[int] = None) -> Camera:
    """Frame the scene's bounding sphere from the default viewing direction.

    ``settings.position`` is read as a direction: the camera sits on the ray
    from the scene centre along it, far enough back for the padded bounding
    sphere to fit both fields of view. An empty scene uses it as a position.
    """
    settings = settings or get_config().camera
    width = width or settings.width
    height = height or settings.height
    fov_y = math.radians(settings.fov_deg)
    direction = np.asarray(settings.position, dtype=float)
    direction = direction / np.linalg.norm(direction)

    bounds = prims_aabb(prims)
    if bounds is None:
        return Camera(tuple(settings.position), (0.0, 0.0, 0.0), tuple(settings.up),
                      Projection.perspective(fov_y), width, height)

    lo, hi = bounds
    center = (lo + hi) / 2.0
    radius = 0.5 * float(np.linalg.norm(hi - lo)) * (1.0 + settings.padding)
    radius = radius if radius > 0 else 1.0
    # narrower of the two fields of view decides the distance
    fov_x = 2.0 * math.atan(math.tan(fov_y / 2.0) * width / height)
    distance = radius / math.sin(min(fov_y, fov_x) / 2.0)
    position = center + direction * distance
    return Camera(tuple(position), tuple(center), tuple(settings.up),
                  Projection.perspective(fov_y), width, height)
