"""Builtin operators: static signatures and runtime implementations."""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from src.core import transforms as tf
from src.core.errors import ArithmeticEvalError, IndexEvalError, TypeEvalError
from src.core.transforms import Matrix4, Vector3
from src.scene import queries
from src.scene.model import Embedding, Entity


class Ty:
    NUM = "number"
    INT = "integer"
    BOOL = "boolean"
    STR = "string"
    VEC = "vector"
    EMB = "embedding"
    EMBLIST = "embedding-list"
    MATRIX = "matrix"
    ENTITY = "entity"
    POSED = "entity-transform"
    CHILDREN = "sub-entities"
    ANY = "any"


NUMERIC = (Ty.NUM, Ty.INT)


def compatible(actual: str, expected: Sequence[str]) -> bool:
    if actual == Ty.ANY or Ty.ANY in expected:
        return True
    if actual == Ty.INT and Ty.NUM in expected:
        return True
    return actual in expected


@dataclass(frozen=True)
class Signature:
    min_args: int
    max_args: Optional[int]
    arg_types: Tuple[Tuple[str, ...], ...]
    result: Callable[[Sequence[str]], str]

    def expected(self, i: int) -> Tuple[str, ...]:
        return self.arg_types[min(i, len(self.arg_types) - 1)]


def _fixed(ty: str) -> Callable[[Sequence[str]], str]:
    return lambda _args: ty


def _arith_result(args: Sequence[str]) -> str:
    if Ty.VEC in args:
        return Ty.VEC
    if Ty.ANY in args:
        return Ty.ANY
    if all(a == Ty.INT for a in args):
        return Ty.INT
    return Ty.NUM


def _int_if_all_int(args: Sequence[str]) -> str:
    if Ty.ANY in args:
        return Ty.ANY
    return Ty.INT if all(a == Ty.INT for a in args) else Ty.NUM


NUM_OR_VEC = (Ty.NUM, Ty.VEC)
_VEC = (Ty.VEC,)
_NUM = (Ty.NUM,)
_INT = (Ty.INT,)
_BOOL = (Ty.BOOL,)
_EMB = (Ty.EMB,)
_EMBLIST = (Ty.EMBLIST,)
_MATRIX = (Ty.MATRIX,)
_ENTITY = (Ty.ENTITY,)

SIGNATURES: Dict[str, Signature] = {
    "+": Signature(1, None, (NUM_OR_VEC,), _arith_result),
    "-": Signature(1, None, (NUM_OR_VEC,), _arith_result),
    "*": Signature(1, None, (NUM_OR_VEC,), _arith_result),
    "/": Signature(2, 2, (NUM_OR_VEC, _NUM), lambda a: Ty.VEC if a[0] == Ty.VEC else Ty.NUM),
    "mod": Signature(2, 2, (_NUM,), _int_if_all_int),
    "floor": Signature(1, 1, (_NUM,), _fixed(Ty.INT)),
    "abs": Signature(1, 1, (_NUM,), _int_if_all_int),
    "min": Signature(1, None, (_NUM,), _int_if_all_int),
    "max": Signature(1, None, (_NUM,), _int_if_all_int),
    "sqrt": Signature(1, 1, (_NUM,), _fixed(Ty.NUM)),
    "sin": Signature(1, 1, (_NUM,), _fixed(Ty.NUM)),
    "cos": Signature(1, 1, (_NUM,), _fixed(Ty.NUM)),
    "<": Signature(2, 2, (_NUM,), _fixed(Ty.BOOL)),
    "<=": Signature(2, 2, (_NUM,), _fixed(Ty.BOOL)),
    ">": Signature(2, 2, (_NUM,), _fixed(Ty.BOOL)),
    ">=": Signature(2, 2, (_NUM,), _fixed(Ty.BOOL)),
    "=": Signature(2, 2, ((Ty.NUM, Ty.STR, Ty.BOOL),), _fixed(Ty.BOOL)),
    "and": Signature(1, None, (_BOOL,), _fixed(Ty.BOOL)),
    "or": Signature(1, None, (_BOOL,), _fixed(Ty.BOOL)),
    "not": Signature(1, 1, (_BOOL,), _fixed(Ty.BOOL)),
    "vec": Signature(3, 3, (_NUM,), _fixed(Ty.VEC)),
    "translate": Signature(1, 1, (_VEC,), _fixed(Ty.MATRIX)),
    "rotate": Signature(2, 3, (_NUM, _VEC, _VEC), _fixed(Ty.MATRIX)),
    "scale": Signature(1, 2, (NUM_OR_VEC, _VEC), _fixed(Ty.MATRIX)),
    "reflect": Signature(1, 2, (_VEC, _VEC), _fixed(Ty.MATRIX)),
    "@": Signature(2, None, (_MATRIX,), _fixed(Ty.MATRIX)),
    "compute-shape-min": Signature(1, 1, (_ENTITY,), _fixed(Ty.VEC)),
    "compute-shape-max": Signature(1, 1, (_ENTITY,), _fixed(Ty.VEC)),
    "compute-shape-center": Signature(1, 1, (_ENTITY,), _fixed(Ty.VEC)),
    "compute-shape-sizes": Signature(1, 1, (_ENTITY,), _fixed(Ty.VEC)),
    "nth": Signature(2, 2, (_INT, _EMBLIST), _fixed(Ty.EMB)),
    "drop": Signature(2, 2, (_INT, _EMBLIST), _fixed(Ty.EMBLIST)),
    "car": Signature(1, 1, (_EMBLIST,), _fixed(Ty.EMB)),
    "cdr": Signature(1, 1, (_EMBLIST,), _fixed(Ty.EMBLIST)),
    "length": Signature(1, 1, (_EMBLIST,), _fixed(Ty.INT)),
    "list": Signature(0, None, (_EMB,), _fixed(Ty.EMBLIST)),
    "attr": Signature(2, 3, (_EMB, (Ty.STR,), (Ty.ANY,)), _fixed(Ty.ANY)),
    "extend": Signature(2, None, (_EMB,), _fixed(Ty.EMB)),
}

CONSTANTS: Dict[str, Any] = {"pi": math.pi}
CONSTANT_TYPES: Dict[str, str] = {"pi": Ty.NUM}

MATRIX_BUILDERS = ("translate", "rotate", "scale", "reflect")
ROTATING_BUILDERS = ("rotate", "reflect")


# Runtime

def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _num(op: str, v: Any) -> float:
    if not _is_number(v):
        raise TypeEvalError(f"'{op}' expects a number, got {type_name(v)}")
    return v


def _vec(op: str, v: Any) -> Vector3:
    if not isinstance(v, Vector3):
        raise TypeEvalError(f"'{op}' expects a vector, got {type_name(v)}")
    return v


def type_name(v: Any) -> str:
    if isinstance(v, bool):
        return Ty.BOOL
    if isinstance(v, int):
        return Ty.INT
    if isinstance(v, float):
        return Ty.NUM
    if isinstance(v, str):
        return Ty.STR
    if isinstance(v, Vector3):
        return Ty.VEC
    if isinstance(v, Embedding):
        return Ty.EMB
    if isinstance(v, Matrix4):
        return Ty.MATRIX
    if isinstance(v, Entity):
        return Ty.ENTITY
    if isinstance(v, tuple) and all(isinstance(x, Embedding) for x in v):
        return Ty.EMBLIST
    return type(v).__name__


def _arith(op: str, args: Sequence[Any]) -> Any:
    if any(isinstance(a, Vector3) for a in args):
        arrays = []
        for a in args:
            if isinstance(a, Vector3):
                arrays.append(a.as_array())
            else:
                arrays.append(_num(op, a))
        if op == "+":
            result = sum(arrays[1:], arrays[0])
        elif op == "-":
            result = -arrays[0] if len(arrays) == 1 else arrays[0] - sum(arrays[1:])
        else:
            result = arrays[0]
            for a in arrays[1:]:
                result = result * a
        if np.ndim(result) == 0:
            raise TypeEvalError(f"'{op}' of vectors produced a scalar")
        return Vector3(*(float(v) for v in result))

    nums = [_num(op, a) for a in args]
    if op == "+":
        return sum(nums)
    if op == "-":
        return -nums[0] if len(nums) == 1 else nums[0] - sum(nums[1:])
    result = nums[0]
    for n in nums[1:]:
        result = result * n
    return result


def _divide(a: Any, b: Any) -> Any:
    b = _num("/", b)
    if b == 0:
        raise ArithmeticEvalError("division by zero")
    if isinstance(a, Vector3):
        return Vector3(a.x / b, a.y / b, a.z / b)
    return _num("/", a) / b


def euclidean_mod(a: Any, b: Any) -> Any:
    a, b = _num("mod", a), _num("mod", b)
    if b == 0:
        raise ArithmeticEvalError("modulo by zero")
    return a % abs(b)


def _compare(op: str, a: Any, b: Any) -> bool:
    if op == "=":
        if _is_number(a) and _is_number(b):
            return a == b
        return type(a) is type(b) and a == b
    a, b = _num(op, a), _num(op, b)
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def _bool(op: str, v: Any) -> bool:
    if not isinstance(v, bool):
        raise TypeEvalError(f"'{op}' expects a boolean, got {type_name(v)}")
    return v


def _index(op: str, k: Any) -> int:
    if isinstance(k, float) and k.is_integer():
        k = int(k)
    if not isinstance(k, int) or isinstance(k, bool):
        raise TypeEvalError(f"'{op}' index must be an integer, got {type_name(k)}")
    return k


def _emb_list(op: str, v: Any) -> Tuple[Embedding, ...]:
    if not isinstance(v, tuple) or not all(isinstance(x, Embedding) for x in v):
        raise TypeEvalError(f"'{op}' expects an embedding list, got {type_name(v)}")
    return v


def _nth(k: Any, lst: Any) -> Embedding:
    k, lst = _index("nth", k), _emb_list("nth", lst)
    if not 0 <= k < len(lst):
        raise IndexEvalError(f"nth index {k} out of range for list of length {len(lst)}")
    return lst[k]


def _drop(k: Any, lst: Any) -> Tuple[Embedding, ...]:
    k, lst = _index("drop", k), _emb_list("drop", lst)
    if k < 0:
        raise IndexEvalError(f"drop count {k} is negative")
    return lst[k:]


def _embedding(op: str, v: Any) -> Embedding:
    if not isinstance(v, Embedding):
        raise TypeEvalError(f"'{op}' expects an embedding, got {type_name(v)}")
    return v


def _attr(emb: Any, key: Any, *default: Any) -> Any:
    emb = _embedding("attr", emb)
    if not isinstance(key, str):
        raise TypeEvalError(f"'attr' key must be a string, got {type_name(key)}")
    value = emb.get(key)
    if value is None:
        if default:
            return default[0]
        raise IndexEvalError(f"embedding has no attribute '{key}'")
    if isinstance(value, tuple) and len(value) == 3:
        return Vector3(*value)
    return value


def _extend(*embs: Any) -> Embedding:
    result = _embedding("extend", embs[0])
    for e in embs[1:]:
        result = result.merged(_embedding("extend", e))
    return result


def _entity(op: str, v: Any) -> Entity:
    if not isinstance(v, Entity):
        raise TypeEvalError(f"'{op}' expects an entity, got {type_name(v)}")
    return v


def _matrix(op: str, v: Any) -> Matrix4:
    if not isinstance(v, Matrix4):
        raise TypeEvalError(f"'{op}' expects a matrix, got {type_name(v)}")
    return v


def _scale(factors: Any, *origin: Any) -> Matrix4:
    if _is_number(factors):
        factors = Vector3(factors, factors, factors)
    return tf.scale(_vec("scale", factors), *(_vec("scale", o) for o in origin))


def _sqrt(x: Any) -> float:
    x = _num("sqrt", x)
    if x < 0:
        raise ArithmeticEvalError(f"sqrt of negative number {x}")
    return math.sqrt(x)


IMPLEMENTATIONS: Dict[str, Callable[..., Any]] = {
    "+": lambda *a: _arith("+", a),
    "-": lambda *a: _arith("-", a),
    "*": lambda *a: _arith("*", a),
    "/": _divide,
    "mod": euclidean_mod,
    "floor": lambda x: int(math.floor(_num("floor", x))),
    "abs": lambda x: abs(_num("abs", x)),
    "min": lambda *a: min(_num("min", x) for x in a),
    "max": lambda *a: max(_num("max", x) for x in a),
    "sqrt": _sqrt,
    "sin": lambda x: math.sin(_num("sin", x)),
    "cos": lambda x: math.cos(_num("cos", x)),
    "<": lambda a, b: _compare("<", a, b),
    "<=": lambda a, b: _compare("<=", a, b),
    ">": lambda a, b: _compare(">", a, b),
    ">=": lambda a, b: _compare(">=", a, b),
    "=": lambda a, b: _compare("=", a, b),
    "not": lambda a: not _bool("not", a),
    "vec": lambda x, y, z: Vector3(float(_num("vec", x)), float(_num("vec", y)),
                                   float(_num("vec", z))),
    "translate": lambda v: tf.translate(_vec("translate", v)),
    "rotate": lambda angle, d, *p: tf.rotate(_num("rotate", angle), _vec("rotate", d),
                                             *(_vec("rotate", x) for x in p)),
    "scale": _scale,
    "reflect": lambda n, *p: tf.reflect(_vec("reflect", n), *(_vec("reflect", x) for x in p)),
    "@": lambda *ms: tf.compose(_matrix("@", m) for m in ms),
    "compute-shape-min": lambda e: queries.compute_shape_min(_entity("compute-shape-min", e)),
    "compute-shape-max": lambda e: queries.compute_shape_max(_entity("compute-shape-max", e)),
    "compute-shape-center": lambda e: queries.compute_shape_center(
        _entity("compute-shape-center", e)),
    "compute-shape-sizes": lambda e: queries.compute_shape_sizes(
        _entity("compute-shape-sizes", e)),
    "nth": _nth,
    "drop": _drop,
    "car": lambda lst: _nth(0, lst),
    "cdr": lambda lst: _drop(1, lst),
    "length": lambda lst: len(_emb_list("length", lst)),
    "list": lambda *embs: tuple(_embedding("list", e) for e in embs),
    "attr": _attr,
    "extend": _extend,
}

# Evaluated lazily by the interpreter so that only the needed operands run.
SHORT_CIRCUIT = ("and", "or")
