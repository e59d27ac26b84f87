"""Scene Language toolkit - main package."""

__version__ = '1.0.0'
__author__ = 'Scene Language Team'
