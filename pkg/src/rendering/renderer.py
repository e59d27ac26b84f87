"""Software renderer: shaded images and discriminative label maps."""

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from matplotlib.colors import hsv_to_rgb

from src.core.config import RendererSettings, get_config, render_threads
from src.core.errors import InvalidArgumentError
from src.rendering.camera import Camera
from src.rendering.intersect import intersect_batch
from src.scene.model import FlatPrimitive

MODES = ("shaded", "semantic", "instance", "correspondence", "depth")
LABEL_MODES = ("semantic", "instance", "correspondence")

GOLDEN_RATIO_CONJUGATE = 0.618033988749895


@dataclass
class Image:
    """Rendered frame. ``labels`` is 0 for background pixels."""

    width: int
    height: int
    mode: str
    pixels: np.ndarray
    labels: np.ndarray
    depth: np.ndarray
    legend: Dict[int, str] = field(default_factory=dict)

    @property
    def hit_fraction(self) -> float:
        return float(np.count_nonzero(np.isfinite(self.depth))) / (self.width * self.height)

    def label_set(self) -> List[int]:
        return sorted(int(v) for v in np.unique(self.labels) if v != 0)


def _hsv(hue: float) -> np.ndarray:
    return hsv_to_rgb([hue % 1.0, 0.65, 0.95])


def id_color(label: int) -> Tuple[int, int, int]:
    """Golden-ratio hue stepping; label 0 is black."""
    if label == 0:
        return (0, 0, 0)
    rgb = _hsv(label * GOLDEN_RATIO_CONJUGATE)
    return tuple(int(round(c * 255)) for c in rgb)


def word_color(word: str) -> Tuple[int, int, int]:
    """Stable color for a word, independent of scene content and process."""
    digest = hashlib.sha1(word.encode("utf-8")).digest()
    hue = int.from_bytes(digest[:8], "big") / float(1 << 64)
    return tuple(int(round(c * 255)) for c in _hsv(hue))


def _to_u8(rgb: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)


def _trace(prims: Sequence[FlatPrimitive], origins: np.ndarray, dirs: np.ndarray,
           settings: RendererSettings) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nearest-hit index, distance and normal per ray (index -1 on miss)."""
    n = len(origins)
    best_t = np.full(n, np.inf)
    best_idx = np.full(n, -1, dtype=np.int64)
    best_n = np.zeros((n, 3))
    # ascending embedding id, so a strict improvement is needed to replace an earlier hit
    for idx, prim in enumerate(prims):
        t, normals = intersect_batch(origins, dirs, prim, settings.epsilon)
        better = t < best_t - settings.tie_tolerance
        best_t[better] = t[better]
        best_idx[better] = idx
        best_n[better] = normals[better]
    return best_idx, best_t, best_n


def render(prims: Sequence[FlatPrimitive], camera: Camera, mode: str = "shaded",
           settings: Optional[RendererSettings] = None,
           threads: Optional[int] = None) -> Image:
    """Ray trace ``prims`` with one pixel-center ray per pixel."""
    if mode not in MODES:
        raise InvalidArgumentError(f"unknown render mode '{mode}'; expected one of {MODES}")
    settings = settings or get_config().renderer
    threads = threads or render_threads(settings)
    ordered = sorted(prims, key=lambda p: p.embedding_id)

    w, h = camera.width, camera.height
    idx = np.empty(w * h, dtype=np.int64)
    dist = np.empty(w * h)
    normals = np.empty((w * h, 3))

    def tile(row_start: int) -> None:
        row_stop = min(h, row_start + settings.tile_rows)
        origins, dirs = camera.rays(row_start, row_stop)
        sl = slice(row_start * w, row_stop * w)
        idx[sl], dist[sl], normals[sl] = _trace(ordered, origins, dirs, settings)

    starts = range(0, h, settings.tile_rows)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(tile, starts))
    else:
        for start in starts:
            tile(start)

    logger.debug(f"Rendered {len(ordered)} primitive(s) at {w}x{h} in '{mode}' mode "
                 f"with {threads} thread(s)")

    hit = idx >= 0
    labels = np.zeros(w * h, dtype=np.uint32)
    legend: Dict[int, str] = {}
    pixels = np.zeros((w * h, 3), dtype=np.uint8)

    if mode == "shaded":
        pixels[:] = _to_u8(np.asarray(settings.background, dtype=float))
        if ordered:
            default = get_config().interpreter.default_color
            colors = np.array([p.spec.color or default for p in ordered], dtype=float)
            light = np.asarray(settings.light_direction, dtype=float)
            light = light / np.linalg.norm(light)
            lambert = np.maximum(0.0, normals[hit] @ light)
            intensity = np.clip(settings.ambient + settings.light_intensity * lambert, 0.0, 1.0)
            pixels[hit] = _to_u8(colors[idx[hit]] * intensity[:, None])
        labels[hit] = [ordered[i].embedding_id for i in idx[hit]]
    elif mode == "depth":
        inv = np.zeros(w * h)
        inv[hit] = 1.0 / dist[hit]
        peak = inv.max() if hit.any() else 1.0
        gray = _to_u8(inv / peak)
        pixels[:] = gray[:, None]
        labels[hit] = [ordered[i].embedding_id for i in idx[hit]]
    else:
        per_prim, legend, colors = _label_table(ordered, mode)
        if ordered:
            labels[hit] = per_prim[idx[hit]]
        lut = np.zeros((int(labels.max()) + 1, 3), dtype=np.uint8)
        for label, rgb in colors.items():
            lut[label] = rgb
        pixels[:] = lut[labels]

    return Image(w, h, mode, pixels.reshape(h, w, 3), labels.reshape(h, w),
                 dist.reshape(h, w), legend)


def _label_table(ordered: Sequence[FlatPrimitive],
                 mode: str) -> Tuple[np.ndarray, Dict[int, str], Dict[int, Tuple[int, int, int]]]:
    """Per-primitive label, label -> name, and label -> color for a map mode."""
    per_prim = np.zeros(len(ordered), dtype=np.uint32)
    legend: Dict[int, str] = {}
    colors: Dict[int, Tuple[int, int, int]] = {}
    words: Dict[str, int] = {}
    for i, prim in enumerate(ordered):
        if mode == "semantic":
            label = words.setdefault(prim.word, len(words) + 1)
            colors[label] = word_color(prim.word)
            legend[label] = prim.word
        else:
            label = prim.embedding_id if mode == "instance" else prim.group_id
            colors[label] = id_color(label)
            legend[label] = f"{prim.word}#{prim.embedding_id}" if mode == "instance" else prim.word
        per_prim[i] = label
    return per_prim, legend, colors
