"""Canonical pretty-printer; parse(pretty_print(p)) == p structurally."""

from typing import List

from src.language import ast

MAX_WIDTH = 88


def _string(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") \
        .replace("\t", "\\t")
    return f'"{escaped}"'


def _number(value) -> str:
    return repr(int(value)) if isinstance(value, int) else repr(float(value))


def _parts(node: ast.Node) -> List:
    """Head plus argument parts; nested lists are sub-forms."""
    if isinstance(node, ast.Num):
        return _number(node.value)
    if isinstance(node, ast.Str):
        return _string(node.value)
    if isinstance(node, ast.Var):
        return node.name
    if isinstance(node, ast.Embed):
        return ["embed"] + [[e.key] + [_parts(v) for v in e.values] for e in node.entries]
    if isinstance(node, ast.Call):
        return ["call", _string(node.word)] + [_parts(a) for a in node.args]
    if isinstance(node, ast.Transform):
        return ["transform", _parts(node.entity), _parts(node.matrix)]
    if isinstance(node, ast.UnionForm):
        return ["union"] + [_parts(i) for i in node.items]
    if isinstance(node, ast.UnionLoop):
        return ["union-loop", _parts(node.count), ["lambda", [node.index], _parts(node.body)]]
    if isinstance(node, ast.If):
        return ["if", _parts(node.cond), _parts(node.then), _parts(node.orelse)]
    if isinstance(node, ast.Apply):
        return [node.op] + [_parts(a) for a in node.args]
    if isinstance(node, ast.EntityFunc):
        return ["lambda", list(node.params), _parts(node.body)]
    if isinstance(node, ast.TemporalFunc):
        return ["lambda", [], ["list"] + [_parts(f) for f in node.frames]]
    if isinstance(node, ast.Bind):
        return ["bind", _string(node.word), _parts(node.func)]
    raise TypeError(f"cannot print {type(node).__name__}")


def _flat(part) -> str:
    if isinstance(part, str):
        return part
    return "(" + " ".join(_flat(p) for p in part) + ")"


def _layout(part, indent: int) -> str:
    flat = _flat(part)
    if isinstance(part, str) or indent + len(flat) <= MAX_WIDTH or len(part) <= 1:
        return flat
    pad = " " * (indent + 2)
    head = _flat(part[0])
    # keep short leading operands (words, formals) on the head line
    inline = [head]
    rest = list(part[1:])
    while rest and (isinstance(rest[0], str) or (not rest[0] or all(isinstance(p, str) for p in rest[0]))) \
            and len(inline) < 2:
        inline.append(_flat(rest.pop(0)))
    lines = ["(" + " ".join(inline)]
    for p in rest:
        lines.append(pad + _layout(p, indent + 2))
    return "\n".join(lines) + ")"


def pretty_print(node: ast.Node) -> str:
    if isinstance(node, ast.Program):
        return "\n\n".join(_layout(_parts(n), 0) for n in node.children()) + "\n"
    return _layout(_parts(node), 0)
