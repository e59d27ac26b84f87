"""Affine transform construction and composition.

Matrices are row-major 4x4 arrays acting on column vectors (``M @ p``).
Every constructor returns an immutable :class:`Matrix4` whose bottom row is
exactly ``(0, 0, 0, 1)``.
"""

import math
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from src.core.errors import InvalidArgumentError, SingularMatrixError

DEFAULT_TOLERANCE = 1e-9
SINGULAR_DET = 1e-12

_BOTTOM_ROW = np.array([0.0, 0.0, 0.0, 1.0])


class Vector3(NamedTuple):
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)

    def __add__(self, other):  # type: ignore[override]
        return Vector3(self.x + other[0], self.y + other[1], self.z + other[2])

    def __sub__(self, other):
        return Vector3(self.x - other[0], self.y - other[1], self.z - other[2])


VectorLike = Union[Vector3, Sequence[float], np.ndarray]


def vec3(value: VectorLike) -> Vector3:
    """Coerce a 3-sequence to a finite :class:`Vector3`."""
    arr = np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape != (3,):
        raise InvalidArgumentError(f"expected a 3-vector, got {arr.shape[0]} components")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"vector has non-finite components: {tuple(arr)}")
    return Vector3(float(arr[0]), float(arr[1]), float(arr[2]))


def _unit(value: VectorLike, what: str) -> np.ndarray:
    arr = vec3(value).as_array()
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise InvalidArgumentError(f"{what} must have non-zero length")
    return arr / norm


class Matrix4:
    """Immutable affine transform in GA(3, R)."""

    __slots__ = ("_m",)

    def __init__(self, values: Union[np.ndarray, Iterable[float]]):
        m = np.array(values, dtype=np.float64).reshape(4, 4)
        if not np.all(np.isfinite(m)):
            raise InvalidArgumentError("matrix has non-finite entries")
        if not np.array_equal(m[3], _BOTTOM_ROW):
            raise InvalidArgumentError(f"matrix is not affine: bottom row {tuple(m[3])}")
        m.setflags(write=False)
        self._m = m

    @classmethod
    def identity(cls) -> "Matrix4":
        return cls(np.eye(4))

    @classmethod
    def from_parts(cls, linear: np.ndarray, translation: np.ndarray) -> "Matrix4":
        m = np.eye(4)
        m[:3, :3] = linear
        m[:3, 3] = translation
        return cls(m)

    @property
    def m(self) -> np.ndarray:
        return self._m

    @property
    def linear(self) -> np.ndarray:
        return self._m[:3, :3]

    @property
    def translation(self) -> Vector3:
        return Vector3(*(float(v) for v in self._m[:3, 3]))

    def __matmul__(self, other: "Matrix4") -> "Matrix4":
        return matmul(self, other)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matrix4) and np.array_equal(self._m, other._m)

    def __hash__(self) -> int:
        return hash(self._m.tobytes())

    def __repr__(self) -> str:
        rows = ", ".join("[" + ", ".join(f"{v:.6g}" for v in row) + "]" for row in self._m[:3])
        return f"Matrix4({rows})"

    def allclose(self, other: "Matrix4", tol: float = DEFAULT_TOLERANCE) -> bool:
        return bool(np.max(np.abs(self._m - other._m)) <= tol)

    def is_identity(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return self.allclose(IDENTITY, tol)

    def to_list(self) -> list:
        """Row-major list of 16 floats (the JSON form)."""
        return [float(v) for v in self._m.reshape(-1)]

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "Matrix4":
        if len(values) != 16:
            raise InvalidArgumentError(f"matrix JSON needs 16 numbers, got {len(values)}")
        return cls(values)


IDENTITY = Matrix4.identity()


def translate(offset: VectorLike) -> Matrix4:
    """Pure translation by ``offset``."""
    return Matrix4.from_parts(np.eye(3), vec3(offset).as_array())


def rotate(angle: float, direction: VectorLike, point: VectorLike = (0.0, 0.0, 0.0)) -> Matrix4:
    """Right-handed rotation by ``angle`` radians about the axis through ``point``."""
    if not math.isfinite(angle):
        raise InvalidArgumentError(f"rotation angle must be finite, got {angle}")
    axis = _unit(direction, "rotation direction")
    pivot = vec3(point).as_array()

    # Rodrigues
    k = np.array([
        [0.0, -axis[2], axis[1]],
        [axis[2], 0.0, -axis[0]],
        [-axis[1], axis[0], 0.0],
    ])
    r = np.eye(3) + math.sin(angle) * k + (1.0 - math.cos(angle)) * (k @ k)
    return Matrix4.from_parts(r, pivot - r @ pivot)


def scale(factors: VectorLike, origin: VectorLike = (0.0, 0.0, 0.0)) -> Matrix4:
    """Per-axis scaling about ``origin``: T(origin) . diag(factors) . T(-origin)."""
    f = vec3(factors).as_array()
    if np.any(f == 0.0):
        raise InvalidArgumentError(f"scale factors must be non-zero, got {tuple(f)}")
    o = vec3(origin).as_array()
    return Matrix4.from_parts(np.diag(f), o - f * o)


def reflect(normal: VectorLike, point: VectorLike = (0.0, 0.0, 0.0)) -> Matrix4:
    """Mirror across the plane through ``point`` with normal ``normal``."""
    n = _unit(normal, "reflection normal")
    p = vec3(point).as_array()
    h = np.eye(3) - 2.0 * np.outer(n, n)
    return Matrix4.from_parts(h, 2.0 * float(n @ p) * n)


def matmul(a: Matrix4, b: Matrix4) -> Matrix4:
    """Product ``a . b``: applying it applies ``b`` first, then ``a``."""
    out = a.m @ b.m
    out[3] = _BOTTOM_ROW
    return Matrix4(out)


def compose(matrices: Iterable[Matrix4]) -> Matrix4:
    """Left-to-right product of ``matrices`` (identity when empty)."""
    result = IDENTITY
    for m in matrices:
        result = matmul(result, m)
    return result


def apply_point(m: Matrix4, p: VectorLike) -> Vector3:
    """Image of point ``p`` under ``m`` (translation included)."""
    v = vec3(p).as_array()
    return Vector3(*(float(c) for c in m.linear @ v + m.m[:3, 3]))


def apply_direction(m: Matrix4, d: VectorLike) -> Vector3:
    """Image of direction ``d``; translation is ignored."""
    return Vector3(*(float(c) for c in m.linear @ vec3(d).as_array()))


def determinant(m: Matrix4) -> float:
    """Determinant of the linear part."""
    return float(np.linalg.det(m.linear))


def invert(m: Matrix4) -> Matrix4:
    """Inverse affine transform; raises SingularMatrixError when det is ~0."""
    det = determinant(m)
    if abs(det) <= SINGULAR_DET:
        raise SingularMatrixError(f"matrix is singular (det={det:.3e})")
    inv_linear = np.linalg.inv(m.linear)
    return Matrix4.from_parts(inv_linear, -inv_linear @ m.m[:3, 3])
