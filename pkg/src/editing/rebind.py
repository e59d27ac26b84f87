"""Function rebinding: replace or add the entity function bound to a word."""

from loguru import logger

from src.core.errors import ValidationFailed
from src.language import ast
from src.language.parser import parse, parse_entity_func
from src.language.printer import pretty_print
from src.language.validator import errors_only, validate


def rebind(program: ast.Program, word: str, new_func_source: str) -> ast.Program:
    """Bind ``word`` to the function in ``new_func_source``.

    An existing bind is replaced in place; otherwise the new bind is appended,
    turning a primitive word into a composite one.
    """
    func = parse_entity_func(new_func_source)
    new_bind = ast.Bind(word, func)

    replaced = False
    binds = []
    for bind in program.binds:
        if bind.word == word and not replaced:
            binds.append(new_bind)
            replaced = True
        else:
            binds.append(bind)
    if not replaced:
        binds.append(new_bind)
        logger.info(f'Added a new bind for "{word}"')
    else:
        logger.info(f'Rebound "{word}"')

    # round-trip through the printer so every node id is unique again
    edited = parse(pretty_print(ast.Program(tuple(binds), root_embedding=program.root_embedding)),
                   program.filename)
    errors = errors_only(validate(edited))
    if errors:
        raise ValidationFailed(errors)
    return edited
