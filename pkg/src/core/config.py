"""Application configuration loaded from YAML with environment overrides."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, Field

from src.core.errors import InvalidArgumentError

PROJECT_ROOT = Path(__file__).resolve().parents[2]
CONFIG_DIR = PROJECT_ROOT / "config"
DEFAULT_CONFIG_PATH = CONFIG_DIR / "app_config.yaml"
DEFAULT_PALETTE_PATH = CONFIG_DIR / "block_palette.yaml"


class InterpreterSettings(BaseModel):
    depth_limit: int = Field(64, ge=1)
    default_color: Tuple[float, float, float] = (0.8, 0.8, 0.8)


class RendererSettings(BaseModel):
    light_direction: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    light_intensity: float = 0.9
    ambient: float = 0.1
    background: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    epsilon: float = 1e-6
    tie_tolerance: float = 1e-12
    threads: Optional[int] = None
    tile_rows: int = Field(32, ge=1)


class CameraSettings(BaseModel):
    position: Tuple[float, float, float] = (3.0, 3.0, 5.0)
    up: Tuple[float, float, float] = (0.0, 1.0, 0.0)
    fov_deg: float = 40.0
    padding: float = 0.10
    width: int = Field(512, ge=1)
    height: int = Field(512, ge=1)


class MinecraftSettings(BaseModel):
    default_block: str = "minecraft:gray_concrete"
    default_color: Tuple[float, float, float] = (0.5, 0.5, 0.5)
    tolerance: float = 1e-9


class ExportSettings(BaseModel):
    mitsuba_version: str = "3.0.0"
    max_depth: int = 8
    sample_count: int = 64


class LoggingSettings(BaseModel):
    level: str = "WARNING"
    format: str = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{line} - {message}"
    file: Optional[str] = None
    rotation: str = "10 MB"


class AppConfig(BaseModel):
    name: str = "Scene Language Toolkit"
    version: str = "1.0.0"
    interpreter: InterpreterSettings = InterpreterSettings()
    renderer: RendererSettings = RendererSettings()
    camera: CameraSettings = CameraSettings()
    minecraft: MinecraftSettings = MinecraftSettings()
    export: ExportSettings = ExportSettings()
    logging: LoggingSettings = LoggingSettings()


def _read_yaml(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning(f"Config file {path} not found, using defaults")
        return {}


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if not value:
        return None
    try:
        return int(value)
    except ValueError:
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}") from None


def _apply_env_overrides(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Overlay SCENELANG_* environment variables onto the raw YAML tree."""
    threads = _env_int("SCENELANG_THREADS")
    if threads is not None:
        raw.setdefault("renderer", {})["threads"] = max(1, threads)

    depth = _env_int("SCENELANG_MAX_DEPTH")
    if depth is not None:
        raw.setdefault("interpreter", {})["depth_limit"] = depth

    level = os.getenv("SCENELANG_LOG_LEVEL")
    if level:
        raw.setdefault("logging", {})["level"] = level.upper()

    return raw


def load_config(path: Optional[Path] = None) -> AppConfig:
    """Load the application configuration.

    Resolution order: explicit ``path``, then ``SCENELANG_CONFIG``, then
    ``config/app_config.yaml`` at the project root.
    """
    load_dotenv()
    config_path = Path(path or os.getenv("SCENELANG_CONFIG") or DEFAULT_CONFIG_PATH)

    raw = _read_yaml(config_path)
    app = raw.pop("app", {}) or {}
    raw.update({k: v for k, v in app.items() if k in ("name", "version")})

    return AppConfig.model_validate(_apply_env_overrides(raw))


@lru_cache(maxsize=1)
def get_config() -> AppConfig:
    """Process-wide configuration, loaded once."""
    return load_config()


def render_threads(settings: RendererSettings) -> int:
    """Effective render parallelism; SCENELANG_THREADS wins over the YAML value."""
    env = _env_int("SCENELANG_THREADS")
    if env is not None:
        return max(1, env)
    if settings.threads:
        return settings.threads
    return os.cpu_count() or 1
