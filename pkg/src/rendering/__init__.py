"""Software renderer, layout projection and image output."""

from .camera import Camera, Projection
from .layout import LayoutBox, auto_camera, project_layout
from .renderer import Image, render

__all__ = [
    'Camera',
    'Projection',
    'LayoutBox',
    'auto_camera',
    'project_layout',
    'Image',
    'render',
]
