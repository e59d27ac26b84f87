"""Image, label-map and layout writers."""

import json
from pathlib import Path
from typing import BinaryIO, Sequence, Union

from PIL import Image as PILImage

from src.core.errors import ArtifactIOError
from src.rendering.layout import LayoutBox
from src.rendering.renderer import Image

FORMATS = {"ppm": "PPM", "png": "PNG"}

Target = Union[str, Path, BinaryIO]


def format_for(path: Union[str, Path], default: str = "ppm") -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    return suffix if suffix in FORMATS else default


def save_image(image: Image, target: Target, fmt: str = "ppm") -> None:
    """Write RGB pixels as binary PPM (P6) or PNG."""
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ArtifactIOError(target, f"unsupported image format '{fmt}'")
    try:
        PILImage.fromarray(image.pixels).save(target, format=FORMATS[fmt])
    except OSError as e:
        raise ArtifactIOError(target, str(e)) from e


def label_map_json(image: Image) -> dict:
    return {
        "width": image.width,
        "height": image.height,
        "labels": [int(v) for v in image.labels.ravel()],
    }


def _write_json(path: Union[str, Path], payload) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, separators=(",", ":"))
            f.write("\n")
    except OSError as e:
        raise ArtifactIOError(path, str(e)) from e


def save_label_map(image: Image, path: Union[str, Path]) -> None:
    _write_json(path, label_map_json(image))


def save_layout(boxes: Sequence[LayoutBox], path: Union[str, Path]) -> None:
    _write_json(path, [b.to_json() for b in boxes])
