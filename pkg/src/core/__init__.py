"""Core modules: errors, configuration, logging and transform algebra."""

from .config import AppConfig, get_config, load_config
from .errors import SceneLanguageError
from .log_setup import configure_logging
from .transforms import Matrix4, Vector3, compose, invert, reflect, rotate, scale, translate

__all__ = [
    'AppConfig',
    'get_config',
    'load_config',
    'SceneLanguageError',
    'configure_logging',
    'Matrix4',
    'Vector3',
    'compose',
    'invert',
    'reflect',
    'rotate',
    'scale',
    'translate',
]

# Module version
__version__ = '1.0.0'
