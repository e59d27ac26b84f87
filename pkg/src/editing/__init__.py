"""Program edits: attribute overrides, rebinding and entity diffs."""

from .diff import diff_entities
from .overrides import OverrideSpec, apply_overrides, load_overrides
from .rebind import rebind

__all__ = [
    'diff_entities',
    'OverrideSpec',
    'apply_overrides',
    'load_overrides',
    'rebind',
]
