import math
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core.errors import (
    AmbiguousRootError, ArithmeticEvalError, DepthLimitError, ExecutionError, IndexEvalError,
    InvalidLoopError, NoRootError, NotTemporalError, PrimitiveSpecError, TypeEvalError,
    UnboundVariableError, ValidationFailed,
)
from src.core.transforms import Vector3, matmul, rotate, translate
from src.language.interpreter import evaluate_expr, execute, execute_temporal, select_root
from src.language.parser import parse, parse_expr
from src.scene.model import Embedding
from src.scene.queries import computation_graph, flatten, repeated_groups

from tests.conftest import load_fixture

PIECES = ("pawn", "rook", "knight", "bishop", "queen", "king")


def run(source: str, **kwargs):
    return execute(parse(source), **kwargs)


def entity_program(body: str, word: str = "scene") -> str:
    return f'(bind "{word}" (lambda (embedding embedding-list) {body}))'


def ev(text: str, **scope):
    return evaluate_expr(parse_expr(text), scope)


# Chessboard

def test_chessboard_structure(chessboard):
    assert chessboard.word == "chessboard"
    assert [child.word for child, _ in chessboard.children] == ["board", "pieces", "pieces"]
    assert len(chessboard.node_at((0,)).children) == 64


def test_chessboard_has_thirty_two_pieces(chessboard):
    words = [node.word for _, node in chessboard.walk() if node.word in PIECES]
    assert len(words) == 32
    assert words.count("pawn") == 16
    assert words.count("king") == 2


def test_chessboard_squares_alternate(chessboard):
    dark = (0.25, 0.2, 0.15)
    for prim in flatten(chessboard):
        if prim.word != "square":
            continue
        x, _, z = prim.world_center
        col, row = round(x + 3.5), round(z + 3.5)
        assert (prim.spec.color == dark) == ((col + row) % 2 == 0)


def test_black_pieces_face_the_other_way(chessboard):
    kings = [p for p in flatten(chessboard) if p.path[:1] in ((1,), (2,)) and p.word == "king-cross"]
    white_z = {round(p.world_center.z, 9) for p in kings if p.path[0] == 1}
    black_z = {round(p.world_center.z, 9) for p in kings if p.path[0] == 2}
    assert white_z == {-3.5}
    assert black_z == {3.5}


def test_shared_pawn_literal_has_one_origin(chessboard):
    origins = {node.embedding.origin for _, node in chessboard.walk() if node.word == "pawn"}
    assert len(origins) == 1
    assert origins != {None}


def test_board_fans_out_to_every_square(chessboard):
    graph = computation_graph(chessboard)
    assert graph.out_degree((0,)) == 64
    assert graph.number_of_nodes() == sum(1 for _ in chessboard.walk())


def test_execution_report(chessboard_program):
    _, report = execute(chessboard_program)
    assert report.root_word == "chessboard"
    assert report.leaf_count == 64 + 32 * 2 + 2
    assert report.warnings == []
    assert report.to_json()["leaf_count"] == report.leaf_count


def test_embedding_ids_follow_preorder():
    root, _ = execute(load_fixture("two_cubes.sl"))
    assert [node.embedding.id for _, node in root.walk()] == [1, 2, 3]


# Root selection

def test_ambiguous_root_lists_candidates():
    with pytest.raises(AmbiguousRootError) as info:
        execute(load_fixture("two_roots.sl"))
    assert info.value.candidates == ["left", "right"]
    assert info.value.exit_code == 3


def test_entry_word_resolves_ambiguity():
    root, _ = execute(load_fixture("two_roots.sl"), entry="right")
    assert root.word == "right"
    assert flatten(root)[0].world_center == pytest.approx((1, 0, 0))


def test_unknown_entry_word():
    with pytest.raises(NoRootError):
        select_root(load_fixture("two_roots.sl"), "middle")


def test_invalid_program_is_not_executed():
    with pytest.raises(ValidationFailed) as info:
        execute(load_fixture("invalid.sl"))
    assert info.value.exit_code == 2
    assert info.value.diagnostics[0].code == "unbound-variable"


# Control flow

LEAVES = [
    '(call "c" (embed (shape "sphere") (radius (+ 1 {i}))))',
    '(call "c" (embed (shape "cube") (size 1 (+ 1 {i}) 1)))',
    '(call "c" (embed (shape "cylinder") (p0 0 0 0) (p1 0 (+ 1 {i}) 0) (radius .5)))',
]


def loop_bodies():
    number = st.floats(min_value=-10, max_value=10, allow_nan=False).map(repr)
    translate_ = st.tuples(number, number).map(
        lambda ab: f"(translate (vec (* {ab[0]} {{i}}) {ab[1]} 0))")
    rotate_ = number.map(lambda a: f"(rotate (* {a} {{i}}) (vec 0 1 0))")
    scale_ = st.floats(min_value=0, max_value=2).map(lambda c: f"(scale (+ 1 (* {c!r} {{i}})))")
    matrix = st.recursive(st.one_of(translate_, rotate_, scale_),
                          lambda inner: st.tuples(inner, inner).map(lambda m: f"(@ {m[0]} {m[1]})"),
                          max_leaves=4)
    return st.tuples(st.sampled_from(LEAVES), matrix).map(
        lambda lm: f"(transform {lm[0]} {lm[1]})")


@given(st.integers(min_value=0, max_value=16), loop_bodies())
def test_union_loop_matches_unrolled_union(n, body):
    looped = entity_program(f"(union-loop {n} (lambda (i) {body.format(i='i')}))")
    unrolled = entity_program(
        "(union " + " ".join(body.format(i=i) for i in range(n)) + ")")
    assert run(looped)[0] == run(unrolled)[0]


def test_loop_index_starts_at_zero():
    source = entity_program(
        '(union-loop 3 (lambda (i) (transform (call "c" (embed (shape "sphere") (radius 1)))'
        ' (translate (vec i 0 0)))))')
    root, _ = run(source)
    assert [p.world_center.x for p in flatten(root)] == [0.0, 1.0, 2.0]


def test_negative_loop_count():
    source = entity_program("(union-loop (- 0 2) (lambda (i) (transform (call \"c\") (scale 1))))")
    with pytest.raises(InvalidLoopError, match="non-negative"):
        run(source)


def test_fractional_loop_count_from_an_attribute():
    source = entity_program(
        '(union-loop (attr embedding "n" 2.5) (lambda (i) (transform (call "c") (scale 1))))')
    with pytest.raises(InvalidLoopError, match="integer"):
        run(source)


def test_recursion_terminates_through_if():
    root, report = execute(load_fixture("fractal_tree.sl"))
    assert report.leaf_count == 15
    assert report.max_depth_reached == 6
    assert {p.word for p in flatten(root)} == {"trunk"}


def test_runaway_recursion_hits_the_depth_limit():
    with pytest.raises(DepthLimitError) as info:
        execute(load_fixture("runaway.sl"))
    assert info.value.limit == 64
    assert info.value.cycle == ["forever", "forever"]
    assert '"forever" -> "forever"' in str(info.value)


def test_depth_limit_is_configurable():
    with pytest.raises(DepthLimitError):
        execute(load_fixture("fractal_tree.sl"), depth_limit=5)
    execute(load_fixture("fractal_tree.sl"), depth_limit=6)


@pytest.mark.parametrize("limit", [400, 1000])
def test_deep_limits_stop_with_a_depth_error(limit):
    before = sys.getrecursionlimit()
    with pytest.raises(DepthLimitError) as info:
        execute(load_fixture("runaway.sl"), depth_limit=limit)
    assert info.value.limit == limit
    assert info.value.cycle == ["forever", "forever"]
    assert sys.getrecursionlimit() == before


def test_limits_beyond_the_interpreter_stack_report_the_depth_reached():
    before = sys.getrecursionlimit()
    with pytest.raises(DepthLimitError) as info:
        execute(load_fixture("runaway.sl"), depth_limit=50_000)
    assert 100 < info.value.limit < 50_000
    assert info.value.cycle[-1] == "forever"
    assert sys.getrecursionlimit() == before


def test_missing_embedding_warns(log_messages):
    source = (entity_program('(union (transform (call "part") (scale 1)))')
              + entity_program('(union (transform (call "c" (embed (shape "sphere") (radius 1)))'
                               ' (scale 1)))', "part"))
    _, report = run(source)
    assert any('"part" has no embedding' in w for w in report.warnings)
    assert any(m.startswith("WARNING:") and "no embedding" in m for m in log_messages)


def test_bad_primitive_names_the_word():
    source = entity_program('(union (transform (call "blob" (embed (shape "torus"))) (scale 1)))')
    with pytest.raises(PrimitiveSpecError, match='"blob"'):
        run(source)


# Correspondence

def test_moai_statues_group_by_height():
    root, _ = execute(load_fixture("moai.sl"))
    statue_groups = [paths for paths in repeated_groups(root).values() if len(paths[0]) == 1]
    assert sorted(len(paths) for paths in statue_groups) == [2, 5]
    tall = next(paths for paths in statue_groups if len(paths) == 2)
    assert tall == [(2,), (5,)]


# 4D entity functions

def test_rotating_arm_frames():
    frames, report = execute_temporal(load_fixture("rotating_arm.sl"))
    assert len(frames) == 12 and report.frame_count == 12
    first_link = next(p for p in flatten(frames[0]) if p.word == "link")
    for t, frame in enumerate(frames):
        hub, link = flatten(frame)
        turn = rotate(t * math.pi / 6, (0, 1, 0))
        assert link.world.allclose(matmul(turn, first_link.world), 1e-6)
        assert hub.world.is_identity()


def test_frames_have_independent_ids():
    frames, _ = execute_temporal(load_fixture("rotating_arm.sl"))
    assert all(frame.embedding.id == 1 for frame in frames)


def test_static_frames_are_identical():
    frames, _ = execute_temporal(load_fixture("static_frames.sl"))
    assert len(frames) == 3
    assert frames[0] == frames[1] == frames[2]


def test_static_execution_of_a_temporal_root():
    with pytest.raises(ExecutionError, match="4D"):
        execute(load_fixture("rotating_arm.sl"))


def test_temporal_execution_of_a_static_root():
    with pytest.raises(NotTemporalError):
        execute_temporal(load_fixture("two_cubes.sl"))


# Expressions

@pytest.mark.parametrize("text, expected", [
    ("(+ 1 2 3)", 6),
    ("(- 10)", -10),
    ("(* 2 (vec 1 2 3))", Vector3(2, 4, 6)),
    ("(+ (vec 1 2 3) (vec 1 1 1))", Vector3(2, 3, 4)),
    ("(/ (vec 2 4 6) 2)", Vector3(1, 2, 3)),
    ("(mod -1 8)", 7),
    ("(floor (/ 7 2))", 3),
    ('(if (= (mod (+ 3 5) 2) 0) "dark" "light")', "dark"),
    ('(if (= (mod (+ 3 4) 2) 0) "dark" "light")', "light"),
    ("(and (< 1 2) (not (> 1 2)))", True),
    ("(max 1 5 3)", 5),
    ("(sqrt 16)", 4.0),
])
def test_expression_values(text, expected):
    assert ev(text) == expected


def test_pi_constant():
    assert ev("(cos pi)") == pytest.approx(-1.0)


def test_matrix_expression():
    m = ev("(@ (translate (vec 1 0 0)) (rotate (/ pi 2) (vec 0 0 1)))")
    assert m.allclose(matmul(translate((1, 0, 0)), rotate(math.pi / 2, (0, 0, 1))), 1e-12)


def test_attr_and_extend():
    base = Embedding.from_mapping({"a": 1, "color": (1, 0, 0)})
    assert ev('(attr (extend z (embed (a 2) (b 3))) "a")', z=base) == 2.0
    assert ev('(attr z "color")', z=base) == Vector3(1, 0, 0)
    assert ev('(attr z "missing" 7)', z=base) == 7
    with pytest.raises(IndexEvalError, match="missing"):
        ev('(attr z "missing")', z=base)


def test_list_operations():
    zs = tuple(Embedding.from_mapping({"k": i}) for i in range(3))
    assert ev("(length zs)", zs=zs) == 3
    assert ev('(attr (nth 2 zs) "k")', zs=zs) == 2.0
    assert ev('(attr (car (cdr zs)) "k")', zs=zs) == 1.0
    assert ev("(length (drop 5 zs))", zs=zs) == 0


def test_nth_out_of_range():
    with pytest.raises(IndexEvalError, match="out of range"):
        ev("(nth 3 zs)", zs=(Embedding(),))


def test_division_by_zero_carries_a_span():
    with pytest.raises(ArithmeticEvalError) as info:
        ev("(+ 1 (/ 1 0))")
    assert info.value.span is not None
    assert info.value.span.column == 6


def test_and_short_circuits():
    assert ev("(and (< 1 0) (nth 5 zs))", zs=()) is False
    assert ev("(or (< 0 1) (nth 5 zs))", zs=()) is True


def test_type_errors():
    with pytest.raises(TypeEvalError):
        ev('(+ 1 "two")')
    with pytest.raises(TypeEvalError):
        ev("(if 1 2 3)")


def test_unbound_variable_at_runtime():
    with pytest.raises(UnboundVariableError):
        ev("(+ x 1)")


def test_shape_queries_inside_expressions():
    leaf = '(call "c" (embed (shape "cube") (size 2 2 2)))'
    assert np.allclose(ev(f"(compute-shape-max {leaf})"), (1, 1, 1))
