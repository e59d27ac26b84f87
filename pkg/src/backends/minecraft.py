"""Minecraft voxel backend: cuboid placement/deletion, compilation, palette."""

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import jsonschema
import numpy as np
import yaml
from loguru import logger
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.core.config import DEFAULT_PALETTE_PATH, get_config
from src.core.errors import (
    ArtifactIOError, InvalidArgumentError, NonIntegerPoseError, RotationForbiddenError,
)
from src.core.transforms import Matrix4, translate
from src.language import ast
from src.language.interpreter import MODE_MINECRAFT, execute
from src.scene.model import BlockSpec, FlatPrimitive, PrimitiveSpec
from src.scene.queries import flatten

Cell = Tuple[int, int, int]
Color = Tuple[float, float, float]


@dataclass
class VoxelGrid:
    """Sparse block grid. Mutating operations update the grid in place and return it."""

    occupied: Dict[Cell, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.occupied)

    @property
    def bounds(self) -> Optional[Tuple[Cell, Cell]]:
        """Inclusive min/max occupied cell, or None when empty."""
        if not self.occupied:
            return None
        cells = np.array(list(self.occupied), dtype=np.int64)
        lo, hi = cells.min(axis=0), cells.max(axis=0)
        return tuple(int(v) for v in lo), tuple(int(v) for v in hi)

    def count(self, block: str) -> int:
        return sum(1 for b in self.occupied.values() if b == block)


class BlockPalette(BaseModel):
    """Average block colors; unknown block types fall back to the default block."""

    default_block: str = "minecraft:gray_concrete"
    default_color: Color = (0.5, 0.5, 0.5)
    blocks: Dict[str, Color] = Field(default_factory=dict)

    @field_validator("default_color")
    @classmethod
    def _check_default(cls, v: Color) -> Color:
        if not all(0.0 <= c <= 1.0 for c in v):
            raise ValueError(f"default color {v} is not a valid RGB triple")
        return v

    @field_validator("blocks")
    @classmethod
    def _check_blocks(cls, v: Dict[str, Color]) -> Dict[str, Color]:
        for name, rgb in v.items():
            if not name:
                raise ValueError("palette block names must be non-empty")
            if not all(0.0 <= c <= 1.0 for c in rgb):
                raise ValueError(f"color of '{name}' {rgb} is not a valid RGB triple")
        return v

    def __contains__(self, block: str) -> bool:
        return block in self.blocks

    def color(self, block: str) -> Color:
        return tuple(self.blocks.get(block, self.default_color))


def load_palette(path: Optional[Union[str, Path]] = None) -> BlockPalette:
    """Read a palette YAML (``default_block``, ``default_color``, ``blocks``)."""
    path = Path(path or DEFAULT_PALETTE_PATH)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except OSError as e:
        raise ArtifactIOError(path, str(e)) from e
    settings = get_config().minecraft
    raw.setdefault("default_block", settings.default_block)
    raw.setdefault("default_color", settings.default_color)
    try:
        palette = BlockPalette.model_validate(raw)
    except ValidationError as e:
        raise InvalidArgumentError(f"invalid block palette {path}: {e}") from e
    logger.debug(f"Loaded {len(palette.blocks)} block colors from {path}")
    return palette


def _check_size(size) -> Cell:
    if len(size) != 3 or any(int(s) != s or s < 1 for s in size):
        raise InvalidArgumentError(f"cuboid size must be three positive integers, got {size}")
    return tuple(int(s) for s in size)


def _region(size: Cell, origin: Cell):
    return itertools.product(*(range(o, o + s) for o, s in zip(origin, size)))


def set_cuboid(grid: VoxelGrid, block_type: str, size, fill: bool = True,
               origin=(0, 0, 0)) -> VoxelGrid:
    """Place a solid or hollow cuboid whose front-left-bottom corner is ``origin``."""
    if not block_type:
        raise InvalidArgumentError("block type must be non-empty")
    size = _check_size(size)
    origin = tuple(int(o) for o in origin)
    for cell in _region(size, origin):
        if not fill:
            local = [c - o for c, o in zip(cell, origin)]
            on_shell = any(v == 0 or v == s - 1 for v, s in zip(local, size))
            if not on_shell:
                continue
        grid.occupied[cell] = block_type
    return grid


def delete_blocks(grid: VoxelGrid, size, origin=(0, 0, 0)) -> VoxelGrid:
    """Clear every cell of the ``size`` region anchored at ``origin``."""
    size = _check_size(size)
    origin = tuple(int(o) for o in origin)
    for cell in _region(size, origin):
        grid.occupied.pop(cell, None)
    return grid


def _integral(values: np.ndarray, tol: float) -> bool:
    return bool(np.all(np.abs(values - np.rint(values)) <= tol))


def block_placement(world: Matrix4, tol: float = 1e-9) -> Tuple[Cell, Cell]:
    """Integer axis scale factors and translation of a Minecraft world pose."""
    linear = world.linear
    off_diagonal = linear - np.diag(np.diag(linear))
    diagonal = np.diag(linear)
    if np.any(np.abs(off_diagonal) > tol) or np.any(diagonal <= tol):
        raise RotationForbiddenError(
            "rotation and reflection are not allowed in Minecraft; only integer translation "
            "and positive integer scaling are supported")
    offset = world.translation.as_array()
    if not _integral(diagonal, tol):
        raise NonIntegerPoseError(f"non-integer scale factors {diagonal.tolist()}")
    if not _integral(offset, tol):
        raise NonIntegerPoseError(f"non-integer translation {offset.tolist()}")
    return tuple(int(v) for v in np.rint(diagonal)), tuple(int(v) for v in np.rint(offset))


def compile_minecraft(program: ast.Program, palette: Optional[BlockPalette] = None,
                      entry: Optional[str] = None,
                      depth_limit: Optional[int] = None) -> VoxelGrid:
    """Execute ``program`` in Minecraft mode and rasterize its leaves in flatten order."""
    palette = palette or load_palette()
    tol = get_config().minecraft.tolerance
    root, _ = execute(program, entry, depth_limit, mode=MODE_MINECRAFT)

    grid = VoxelGrid()
    for prim in flatten(root):
        spec: BlockSpec = prim.spec
        factors, origin = block_placement(prim.world, tol)
        size = tuple(s * f for s, f in zip(spec.size, factors))
        if spec.delete:
            delete_blocks(grid, size, origin)
            continue
        block = spec.block
        if block not in palette:
            logger.warning(f"Unknown block type '{block}' at {prim.word}#{prim.embedding_id}; "
                           f"using '{palette.default_block}'")
            block = palette.default_block
        set_cuboid(grid, block, size, spec.fill, origin)
    logger.info(f"Compiled Minecraft scene: {len(grid)} block(s)")
    return grid


def voxels_to_primitives(grid: VoxelGrid, palette: BlockPalette) -> List[FlatPrimitive]:
    """One unit cube per occupied cell, centered in the cell, grouped by block type."""
    groups: Dict[str, int] = {}
    prims: List[FlatPrimitive] = []
    for i, cell in enumerate(sorted(grid.occupied)):
        block = grid.occupied[cell]
        spec = PrimitiveSpec("cube", palette.color(block), size=(1.0, 1.0, 1.0))
        prims.append(FlatPrimitive(
            spec=spec,
            world=translate(tuple(c + 0.5 for c in cell)),
            path=(i,),
            word=block,
            embedding_id=i + 1,
            group_id=groups.setdefault(block, len(groups) + 1),
        ))
    return prims


VOXEL_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["bounds", "blocks"],
    "properties": {
        "bounds": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["min", "max"],
                    "properties": {
                        "min": {"type": "array", "items": {"type": "integer"},
                                "minItems": 3, "maxItems": 3},
                        "max": {"type": "array", "items": {"type": "integer"},
                                "minItems": 3, "maxItems": 3},
                    },
                },
            ]
        },
        "blocks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["x", "y", "z", "type"],
                "properties": {
                    "x": {"type": "integer"},
                    "y": {"type": "integer"},
                    "z": {"type": "integer"},
                    "type": {"type": "string", "minLength": 1},
                },
            },
        },
    },
}


def voxels_to_json(grid: VoxelGrid) -> Dict[str, Any]:
    """Blocks sorted by (x, y, z) plus the occupied bounds."""
    bounds = grid.bounds
    return {
        "bounds": None if bounds is None else {"min": list(bounds[0]), "max": list(bounds[1])},
        "blocks": [{"x": x, "y": y, "z": z, "type": grid.occupied[(x, y, z)]}
                   for x, y, z in sorted(grid.occupied)],
    }


def voxels_from_json(data: Any) -> VoxelGrid:
    try:
        jsonschema.validate(instance=data, schema=VOXEL_SCHEMA)
    except jsonschema.ValidationError as e:
        raise InvalidArgumentError(f"invalid voxel document: {e.message}") from e
    return VoxelGrid({(b["x"], b["y"], b["z"]): b["type"] for b in data["blocks"]})
