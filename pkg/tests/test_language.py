import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core.errors import LexError, ParseError
from src.language import ast
from src.language.lexer import NUMBER, STRING, SYMBOL, tokenize
from src.language.parser import parse, parse_entity_func, parse_expr
from src.language.printer import pretty_print
from src.language.validator import errors_only, format_diagnostic, root_candidates, validate

from tests.conftest import FIXTURES, load_fixture

VALID_FIXTURES = sorted(p.name for p in FIXTURES.glob("*.sl") if p.name != "invalid.sl")


def entity_program(body: str, word: str = "scene") -> str:
    return f'(bind "{word}" (lambda (embedding embedding-list) {body}))'


CUBE = '(call "cube" (embed (shape "cube") (size 1 1 1)))'


# Lexer

def test_tokens_of_a_small_form():
    tokens = tokenize('(vec 1 -2.5 .5) "hi"')
    assert [t.kind for t in tokens] == ["(", SYMBOL, NUMBER, NUMBER, NUMBER, ")", STRING]
    assert [t.value for t in tokens[2:5]] == [1, -2.5, 0.5]
    assert isinstance(tokens[2].value, int)


def test_comments_run_to_end_of_line():
    tokens = tokenize("; heading\n(union) ; trailing\n")
    assert [t.kind for t in tokens] == ["(", SYMBOL, ")"]


def test_string_escapes():
    (token,) = tokenize(r'"a \"b\" \\ c\n"')
    assert token.value == 'a "b" \\ c\n'


def test_spans_carry_line_and_column():
    tokens = tokenize("(union\n  (x))")
    x = tokens[3]
    assert (x.value, x.span.line, x.span.column) == ("x", 2, 4)


def test_unterminated_string():
    with pytest.raises(LexError, match="unterminated"):
        tokenize('(call "cube')


def test_minus_alone_is_a_symbol():
    (token,) = tokenize("-")
    assert token.kind == SYMBOL


# Parser

@pytest.mark.parametrize("name", VALID_FIXTURES)
def test_fixtures_parse(name):
    program = load_fixture(name)
    assert program.binds


def test_empty_program():
    assert parse("").binds == ()


def test_node_ids_are_unique():
    program = load_fixture("chessboard.sl")
    ids = [n.node_id for n in ast.walk(program)]
    assert len(ids) == len(set(ids))
    assert all(i > 0 for i in ids)


def test_temporal_function_parses_frames():
    program = load_fixture("rotating_arm.sl")
    func = program.bind_for("arm-animation").func
    assert isinstance(func, ast.TemporalFunc)
    assert len(func.frames) == 12


def test_words_include_unbound_leaves():
    program = load_fixture("three_objects.sl")
    assert program.words == ("still-life", "box", "ball", "can")


@pytest.mark.parametrize("source, production", [
    ("(union)", "<START>"),
    ("(bind scene (lambda (embedding embedding-list) (union)))", "<bind-expr>"),
    ('(bind "scene" (lambda (embedding) (union)))', "<entity-func>"),
    (entity_program(CUBE), "<sub-entities>"),
    ('(bind "s" (lambda () (union)))', "<create-entity-list>"),
    (entity_program("(union (transform " + CUBE + "))"), "<entity-transform>"),
    (entity_program("(union-loop 3 (lambda (i j) (union)))"), "<sub-entities>"),
    (entity_program("(union (transform (call cube) (translate (vec 0 0 0))))"), "<entity>"),
    (entity_program('(union (transform (call "c" (embed (k 1) (k 2))) (scale 1)))'),
     "<embedding>"),
])
def test_grammar_violations_name_the_production(source, production):
    with pytest.raises(ParseError) as info:
        parse(source)
    assert production in str(info.value)


def test_unknown_operator():
    with pytest.raises(ParseError, match="unknown form 'frobnicate'"):
        parse_expr("(frobnicate 1)")


def test_operator_arity_is_checked():
    with pytest.raises(ParseError, match="'vec' takes 3"):
        parse_expr("(vec 1 2)")


def test_unbalanced_parentheses():
    with pytest.raises(ParseError, match="unclosed"):
        parse("(bind \"a\"")
    with pytest.raises(ParseError, match="unexpected"):
        parse(")")


def test_parse_error_reports_location():
    with pytest.raises(ParseError) as info:
        parse('\n\n   (union)')
    assert (info.value.span.line, info.value.span.column) == (3, 4)


def test_root_embedding_precedes_the_binds():
    program = load_fixture("gallery.sl")
    assert [e.key for e in program.root_embedding.entries] == ["color", "style"]
    assert program.children()[0] is program.root_embedding
    assert load_fixture("two_cubes.sl").root_embedding is None


def test_root_embedding_must_come_first():
    with pytest.raises(ParseError, match="first top-level form") as info:
        parse(entity_program("(union)") + "\n(embed (style \"late\"))")
    assert "<START>" in str(info.value)
    assert info.value.span.line == 2


def test_parse_entity_func():
    func = parse_entity_func("(lambda (z zs) (union))")
    assert isinstance(func, ast.EntityFunc)
    assert func.params == ("z", "zs")


# Printer

@pytest.mark.parametrize("name", VALID_FIXTURES)
def test_pretty_print_round_trips(name):
    program = load_fixture(name)
    text = pretty_print(program)
    assert parse(text) == program
    assert pretty_print(parse(text)) == text


def test_pretty_print_keeps_short_forms_on_one_line():
    program = parse(entity_program("(union (transform " + CUBE + " (translate (vec 1 2 3))))"))
    assert pretty_print(program.binds[0].func.body.items[0]) == \
        '(transform (call "cube" (embed (shape "cube") (size 1 1 1))) (translate (vec 1 2 3)))'


def test_pretty_print_wraps_long_forms():
    text = pretty_print(load_fixture("chessboard.sl"))
    assert text.count("\n") > 20


@given(st.text())
def test_string_literals_round_trip(value):
    node = ast.Str(value)
    assert parse_expr(pretty_print(node)) == node


@given(st.one_of(st.integers(-10**9, 10**9),
                 st.floats(allow_nan=False, allow_infinity=False)))
def test_number_literals_round_trip(value):
    node = ast.Num(value)
    parsed = parse_expr(pretty_print(node))
    assert parsed == node
    assert type(parsed.value) is type(value)


# Validator

@pytest.mark.parametrize("name", VALID_FIXTURES)
def test_fixtures_have_no_errors(name):
    assert errors_only(validate(load_fixture(name))) == []


def test_unbound_variable_is_reported_with_location():
    diags = validate(load_fixture("invalid.sl"))
    (diag,) = diags
    assert diag.code == "unbound-variable"
    assert "'x'" in diag.message
    assert format_diagnostic(diag, "invalid.sl") == \
        f"invalid.sl:{diag.span.line}:{diag.span.column}: error: {diag.message}"
    assert diag.span.line == 4


def test_formals_are_not_in_scope_of_the_root_embedding():
    source = '(embed (color (attr embedding "color")))\n' + entity_program("(union)")
    diags = validate(parse(source))
    assert [d.code for d in diags] == ["unbound-variable"]
    assert diags[0].span.line == 1


FRAGMENTS = ["(", ")", "\n", "; note\n", '"scene"', '"oops', "x", "i", "1", "-2.5", "pi",
             "bind", "lambda", "embed", "union", "union-loop", "transform", "call",
             "(embedding embedding-list)", "(shape \"cube\")", "(translate (vec 0 0 x))",
             "(attr embedding \"color\")", "(vec 1 2)"]


def source_texts():
    soup = st.lists(st.sampled_from(FRAGMENTS), max_size=40).map(" ".join)
    attribute = st.sampled_from(["1", "i", "x", '"red"', "(vec 1 2 3)", "(scale 2)",
                                 "(attr embedding \"k\")", "(+ i 1.5)"])
    templated = st.tuples(attribute, attribute, st.integers(0, 3)).map(
        lambda t: "\n" * t[2] + f"(embed (a {t[0]}))\n" + entity_program(
            f'(union-loop 3 (lambda (i) (transform (call "c" (embed (b {t[1]}))) (scale 1))))'))
    return st.one_of(soup, templated)


def assert_inside(span, text):
    assert 0 <= span.start <= span.end <= len(text)
    assert span.line == text.count("\n", 0, span.start) + 1
    assert span.column == span.start - text.rfind("\n", 0, span.start)


@given(source_texts())
def test_every_reported_span_lies_inside_the_source(text):
    try:
        program = parse(text)
    except (LexError, ParseError) as e:
        if e.span is not None:
            assert_inside(e.span, text)
        return
    for diag in validate(program):
        assert diag.span is not None
        assert_inside(diag.span, text)


def test_duplicate_bind():
    source = entity_program("(union)") + entity_program("(union)")
    assert [d.code for d in validate(parse(source))] == ["duplicate-bind"]


def test_mutual_recursion_leaves_no_root():
    source = (entity_program('(union (transform (call "b") (scale 1)))', "a")
              + entity_program('(union (transform (call "a") (scale 1)))', "b"))
    assert "no-root" in [d.code for d in validate(parse(source))]


def test_loop_count_must_be_an_integer():
    source = entity_program("(union-loop 2.5 (lambda (i) (transform " + CUBE + " (scale 1))))")
    assert [d.code for d in validate(parse(source))] == ["loop-count"]


def test_calling_a_temporal_function_is_a_type_error():
    source = ('(bind "frames" (lambda () (list (call "cube"))))'
              + entity_program('(union (transform (call "frames") (scale 1)))'))
    assert [d.code for d in validate(parse(source))] == ["type"]


@pytest.mark.parametrize("expr", [
    '(translate 1)',
    '(rotate 1 2)',
    '(@ (translate (vec 0 0 0)) 2)',
])
def test_matrix_type_errors(expr):
    source = entity_program(f"(union (transform {CUBE} {expr}))")
    assert [d.code for d in validate(parse(source))] == ["type"]


def test_transform_needs_an_entity():
    source = entity_program("(union (transform (embed (a 1)) (scale 1)))")
    diags = validate(parse(source))
    assert [d.code for d in diags] == ["type"]
    assert "entity" in diags[0].message


def test_root_candidates():
    assert root_candidates(load_fixture("chessboard.sl")) == ["chessboard"]
    assert root_candidates(load_fixture("two_roots.sl")) == ["left", "right"]
    assert root_candidates(load_fixture("runaway.sl")) == ["forever"]
    assert root_candidates(load_fixture("rotating_arm.sl")) == ["arm-animation"]
