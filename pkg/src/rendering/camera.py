"""Pinhole and orthographic cameras producing pixel-center rays."""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.core.errors import InvalidArgumentError
from src.core.transforms import Vector3, vec3

PERSPECTIVE = "perspective"
ORTHOGRAPHIC = "orthographic"


@dataclass(frozen=True)
class Projection:
    """``perspective`` stores the vertical fov in radians; ``orthographic`` the view height."""

    kind: str
    value: float

    @classmethod
    def perspective(cls, fov_y: float) -> "Projection":
        if not 0.0 < fov_y < math.pi:
            raise InvalidArgumentError(f"perspective fov must be in (0, pi), got {fov_y}")
        return cls(PERSPECTIVE, float(fov_y))

    @classmethod
    def orthographic(cls, height: float) -> "Projection":
        if height <= 0:
            raise InvalidArgumentError(f"orthographic height must be positive, got {height}")
        return cls(ORTHOGRAPHIC, float(height))


@dataclass(frozen=True)
class Camera:
    position: Vector3
    look_at: Vector3
    up: Vector3
    projection: Projection
    width: int
    height: int

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        object.__setattr__(self, "look_at", vec3(self.look_at))
        object.__setattr__(self, "up", vec3(self.up))
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError(f"image size must be at least 1x1, got "
                                       f"{self.width}x{self.height}")
        forward = self.look_at.as_array() - self.position.as_array()
        if np.linalg.norm(forward) == 0:
            raise InvalidArgumentError("camera position equals look_at")
        if np.linalg.norm(np.cross(forward, self.up.as_array())) <= 1e-12:
            raise InvalidArgumentError("camera up vector is parallel to the view direction")

    @classmethod
    def from_values(cls, values: Sequence[float], fov_deg: float, width: int,
                    height: int) -> "Camera":
        """Build from ``pos(3), look_at(3), up(3), fov_deg`` or ``pos, look_at, up``."""
        if len(values) not in (9, 10):
            raise InvalidArgumentError(f"camera needs 9 or 10 numbers, got {len(values)}")
        if len(values) == 10:
            fov_deg = values[9]
        return cls(tuple(values[0:3]), tuple(values[3:6]), tuple(values[6:9]),
                   Projection.perspective(math.radians(fov_deg)), width, height)

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def basis(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Right, true-up and forward unit vectors in world space."""
        f = self.look_at.as_array() - self.position.as_array()
        f = f / np.linalg.norm(f)
        r = np.cross(f, self.up.as_array())
        r = r / np.linalg.norm(r)
        u = np.cross(r, f)
        return r, u, f

    def half_extents(self) -> Tuple[float, float]:
        """Half width and height of the image plane at unit distance (or in units)."""
        if self.projection.kind == PERSPECTIVE:
            half_h = math.tan(self.projection.value / 2.0)
        else:
            half_h = self.projection.value / 2.0
        return half_h * self.aspect, half_h

    def rays(self, row_start: int = 0, row_stop: int = None) -> Tuple[np.ndarray, np.ndarray]:
        """Origins and unit directions for rows ``[row_start, row_stop)``, shape (n, 3)."""
        row_stop = self.height if row_stop is None else row_stop
        r, u, f = self.basis()
        half_w, half_h = self.half_extents()
        ys, xs = np.mgrid[row_start:row_stop, 0:self.width]
        sx = ((xs.ravel() + 0.5) / self.width * 2.0 - 1.0) * half_w
        sy = (1.0 - (ys.ravel() + 0.5) / self.height * 2.0) * half_h
        pos = self.position.as_array()
        if self.projection.kind == PERSPECTIVE:
            dirs = f[None, :] + sx[:, None] * r[None, :] + sy[:, None] * u[None, :]
            dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
            origins = np.broadcast_to(pos, dirs.shape).copy()
        else:
            origins = pos[None, :] + sx[:, None] * r[None, :] + sy[:, None] * u[None, :]
            dirs = np.broadcast_to(f, origins.shape).copy()
        return origins, dirs

    def project(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Normalized image coordinates (x right, y down) and camera-space depth."""
        r, u, f = self.basis()
        rel = np.asarray(points, dtype=float) - self.position.as_array()
        depth = rel @ f
        cx, cy = rel @ r, rel @ u
        half_w, half_h = self.half_extents()
        if self.projection.kind == PERSPECTIVE:
            with np.errstate(divide="ignore", invalid="ignore"):
                cx, cy = cx / depth, cy / depth
        nx = (cx / half_w + 1.0) / 2.0
        ny = (1.0 - cy / half_h) / 2.0
        return np.stack([nx, ny], axis=-1), depth
