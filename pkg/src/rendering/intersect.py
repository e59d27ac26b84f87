"""Ray/primitive intersection, vectorized over ray batches.

Rays are mapped into the primitive's local frame through the inverse world
pose without renormalizing, so the hit parameter ``t`` is the same in both
frames and equals the world distance for unit world directions.
"""

from typing import Optional, Tuple

import numpy as np

from src.core.transforms import Vector3, invert, vec3
from src.scene.model import BlockSpec, FlatPrimitive

DEFAULT_EPSILON = 1e-6

Hits = Tuple[np.ndarray, np.ndarray]


def _nearest(t_a: np.ndarray, t_b: np.ndarray, eps: float) -> np.ndarray:
    """Smallest of the two candidates exceeding ``eps`` (inf when neither does)."""
    a = np.where(t_a > eps, t_a, np.inf)
    b = np.where(t_b > eps, t_b, np.inf)
    return np.minimum(a, b)


def _box(o: np.ndarray, d: np.ndarray, lo: np.ndarray, hi: np.ndarray, eps: float) -> Hits:
    parallel = d == 0.0
    inside = (o >= lo) & (o <= hi)
    safe = np.where(parallel, 1.0, d)
    t1 = (lo - o) / safe
    t2 = (hi - o) / safe
    # a parallel ray is inside its slab for all t, or outside for all t
    t_min = np.where(parallel, np.where(inside, -np.inf, np.inf), np.minimum(t1, t2))
    t_max = np.where(parallel, np.where(inside, np.inf, -np.inf), np.maximum(t1, t2))
    t_near = t_min.max(axis=1)
    t_far = t_max.min(axis=1)

    hit = (t_near <= t_far) & (t_far > eps)
    entering = t_near > eps
    t = np.where(hit, np.where(entering, t_near, t_far), np.inf)

    axis = np.where(entering, t_min.argmax(axis=1), t_max.argmin(axis=1))
    normals = np.zeros_like(o)
    rows = np.arange(len(o))
    normals[rows, axis] = -np.sign(d[rows, axis])
    return t, normals


def _sphere(o: np.ndarray, d: np.ndarray, radius: float, eps: float) -> Hits:
    a = np.einsum("ij,ij->i", d, d)
    b = 2.0 * np.einsum("ij,ij->i", o, d)
    c = np.einsum("ij,ij->i", o, o) - radius * radius
    disc = b * b - 4.0 * a * c
    root = np.sqrt(np.maximum(disc, 0.0))
    t = _nearest((-b - root) / (2.0 * a), (-b + root) / (2.0 * a), eps)
    t = np.where(disc >= 0.0, t, np.inf)
    finite = np.where(np.isfinite(t), t, 0.0)
    return t, o + finite[:, None] * d


def _cylinder(o: np.ndarray, d: np.ndarray, p0: np.ndarray, p1: np.ndarray, radius: float,
              eps: float) -> Hits:
    length = float(np.linalg.norm(p1 - p0))
    axis = (p1 - p0) / length
    w = o - p0
    d_ax = d @ axis
    w_ax = w @ axis
    dp = d - d_ax[:, None] * axis
    wp = w - w_ax[:, None] * axis

    a = np.einsum("ij,ij->i", dp, dp)
    b = 2.0 * np.einsum("ij,ij->i", dp, wp)
    c = np.einsum("ij,ij->i", wp, wp) - radius * radius
    disc = b * b - 4.0 * a * c
    side_ok = (a > 1e-15) & (disc >= 0.0)
    root = np.sqrt(np.maximum(disc, 0.0))
    safe_a = np.where(side_ok, a, 1.0)

    candidates = []
    for sign in (-1.0, 1.0):
        t = (-b + sign * root) / (2.0 * safe_a)
        s = w_ax + t * d_ax
        valid = side_ok & (s >= 0.0) & (s <= length) & (t > eps)
        candidates.append(np.where(valid, t, np.inf))

    cap_ok = np.abs(d_ax) > 1e-15
    safe_d_ax = np.where(cap_ok, d_ax, 1.0)
    for plane in (0.0, length):
        t = (plane - w_ax) / safe_d_ax
        radial = wp + t[:, None] * dp
        valid = cap_ok & (np.einsum("ij,ij->i", radial, radial) <= radius * radius) & (t > eps)
        candidates.append(np.where(valid, t, np.inf))

    stacked = np.stack(candidates, axis=1)
    which = stacked.argmin(axis=1)
    t = stacked[np.arange(len(o)), which]

    finite = np.where(np.isfinite(t), t, 0.0)
    side_normal = wp + finite[:, None] * dp
    normals = np.where((which < 2)[:, None], side_normal,
                       np.where((which == 2)[:, None], -axis, axis))
    return t, normals


def intersect_batch(origins: np.ndarray, dirs: np.ndarray, prim: FlatPrimitive,
                    eps: float = DEFAULT_EPSILON) -> Hits:
    """Hit distances (inf on miss) and unit world normals facing the rays."""
    inverse = invert(prim.world)
    o = origins @ inverse.linear.T + inverse.translation.as_array()
    d = dirs @ inverse.linear.T

    spec = prim.spec
    if isinstance(spec, BlockSpec):
        t, n = _box(o, d, np.zeros(3), np.asarray(spec.size, dtype=float), eps)
    elif spec.kind == "cube":
        half = np.asarray(spec.size, dtype=float) / 2.0
        t, n = _box(o, d, -half, half, eps)
    elif spec.kind == "sphere":
        t, n = _sphere(o, d, spec.radius, eps)
    else:
        t, n = _cylinder(o, d, np.asarray(spec.p0, dtype=float), np.asarray(spec.p1, dtype=float),
                         spec.radius, eps)

    # normals transform by the inverse transpose of the world linear part
    world_n = n @ inverse.linear
    norms = np.linalg.norm(world_n, axis=1, keepdims=True)
    world_n = np.divide(world_n, norms, out=np.zeros_like(world_n), where=norms > 0)
    facing = np.einsum("ij,ij->i", world_n, dirs) > 0.0
    world_n[facing] *= -1.0
    return t, world_n


def intersect_ray_primitive(origin, direction, prim: FlatPrimitive,
                            eps: float = DEFAULT_EPSILON) -> Optional[Tuple[float, Vector3]]:
    """Nearest hit of one ray, or None."""
    d = vec3(direction).as_array()
    d = d / np.linalg.norm(d)
    t, n = intersect_batch(vec3(origin).as_array()[None, :], d[None, :], prim, eps)
    if not np.isfinite(t[0]):
        return None
    return float(t[0]), Vector3(*(float(c) for c in n[0]))
