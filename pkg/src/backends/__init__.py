"""Exporters: scene XML, Minecraft voxels and animation frames."""

from .animation import export_animation
from .minecraft import BlockPalette, VoxelGrid, compile_minecraft, load_palette
from .scene_xml import export_scene_xml

__all__ = [
    'export_animation',
    'BlockPalette',
    'VoxelGrid',
    'compile_minecraft',
    'load_palette',
    'export_scene_xml',
]
