"""Scene Language frontend and interpreter."""

from .interpreter import execute, execute_temporal, select_root
from .parser import parse
from .printer import pretty_print
from .validator import validate

__all__ = [
    'execute',
    'execute_temporal',
    'select_root',
    'parse',
    'pretty_print',
    'validate',
]
