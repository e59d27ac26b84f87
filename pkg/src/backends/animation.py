"""Frame-sequence export for 4D entity functions."""

import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from loguru import logger

from src.core.errors import ArtifactIOError, InvalidArgumentError
from src.rendering.camera import Camera
from src.rendering.image_io import save_image
from src.rendering.renderer import render
from src.scene.model import Entity
from src.scene.queries import flatten, temporal_tracks


def frame_name(index: int) -> str:
    return f"frame_{index:04d}.ppm"


def tracks_json(frames: Sequence[Entity]) -> Dict[str, List[Optional[List[float]]]]:
    """Per-leaf-path center tracks keyed by ``"i/j/k"``."""
    return {
        "/".join(str(i) for i in path): [None if c is None else list(c) for c in centers]
        for path, centers in sorted(temporal_tracks(frames).items())
    }


def export_animation(frames: Sequence[Entity], camera: Camera, out_dir: Union[str, Path],
                     mode: str = "shaded", with_tracks: bool = False,
                     threads: Optional[int] = None) -> List[Path]:
    """Render every frame with the same camera into ``out_dir/frame_NNNN.ppm``."""
    if not frames:
        raise InvalidArgumentError("animation needs at least one frame")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ArtifactIOError(out_dir, str(e)) from e

    written: List[Path] = []
    for index, frame in enumerate(frames):
        path = out_dir / frame_name(index)
        save_image(render(flatten(frame), camera, mode, threads=threads), path, "ppm")
        written.append(path)
        logger.debug(f"Wrote {path}")

    if with_tracks:
        path = out_dir / "tracks.json"
        try:
            path.write_text(json.dumps(tracks_json(frames), indent=2) + "\n", encoding="utf-8")
        except OSError as e:
            raise ArtifactIOError(path, str(e)) from e

    logger.info(f"Exported {len(written)} frame(s) to {out_dir}")
    return written
