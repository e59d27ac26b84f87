"""Mitsuba 3 scene XML exporter (shapes, diffuse BSDFs, sensor, path integrator)."""

import math
import xml.etree.ElementTree as ET
from typing import Optional, Sequence

import numpy as np

from src.core.config import ExportSettings, get_config
from src.core.transforms import Matrix4, scale, translate
from src.rendering.camera import PERSPECTIVE, Camera
from src.scene.model import BlockSpec, FlatPrimitive


def _num(value: float) -> str:
    value = float(value)
    return repr(0.0 if value == 0 else value)


def _vec(values: Sequence[float]) -> str:
    return ", ".join(_num(v) for v in values)


def _child(parent: ET.Element, tag: str, **attrs) -> ET.Element:
    return ET.SubElement(parent, tag, {k: str(v) for k, v in attrs.items()})


def _matrix(parent: ET.Element, m: Matrix4) -> None:
    transform = _child(parent, "transform", name="to_world")
    _child(transform, "matrix", value=" ".join(_num(v) for v in m.to_list()))


def _shape(parent: ET.Element, prim: FlatPrimitive, default_color) -> None:
    spec = prim.spec
    if isinstance(spec, BlockSpec):
        # Mitsuba cubes span [-1, 1]^3; blocks span [0, size]
        half = np.asarray(spec.size, dtype=float) / 2.0
        shape = _child(parent, "shape", type="cube", id=f"{prim.word}_{prim.embedding_id}")
        _matrix(shape, prim.world @ translate(half) @ scale(half))
    elif spec.kind == "cube":
        shape = _child(parent, "shape", type="cube", id=f"{prim.word}_{prim.embedding_id}")
        _matrix(shape, prim.world @ scale(np.asarray(spec.size, dtype=float) / 2.0))
    elif spec.kind == "sphere":
        shape = _child(parent, "shape", type="sphere", id=f"{prim.word}_{prim.embedding_id}")
        _child(shape, "float", name="radius", value=_num(spec.radius))
        _matrix(shape, prim.world)
    else:
        shape = _child(parent, "shape", type="cylinder", id=f"{prim.word}_{prim.embedding_id}")
        _child(shape, "point", name="p0", value=_vec(spec.p0))
        _child(shape, "point", name="p1", value=_vec(spec.p1))
        _child(shape, "float", name="radius", value=_num(spec.radius))
        _matrix(shape, prim.world)

    bsdf = _child(shape, "bsdf", type="diffuse")
    _child(bsdf, "rgb", name="reflectance", value=_vec(spec.color or default_color))


def _sensor(parent: ET.Element, camera: Camera, settings: ExportSettings) -> None:
    if camera.projection.kind == PERSPECTIVE:
        sensor = _child(parent, "sensor", type="perspective")
        _child(sensor, "float", name="fov", value=_num(math.degrees(camera.projection.value)))
        _child(sensor, "string", name="fov_axis", value="y")
        transform = _child(sensor, "transform", name="to_world")
    else:
        sensor = _child(parent, "sensor", type="orthographic")
        transform = _child(sensor, "transform", name="to_world")
        half_w, half_h = camera.half_extents()
        _child(transform, "scale", x=_num(half_w), y=_num(half_h), z="1.0")
    _child(transform, "lookat", origin=_vec(camera.position), target=_vec(camera.look_at),
           up=_vec(camera.up))

    sampler = _child(sensor, "sampler", type="independent")
    _child(sampler, "integer", name="sample_count", value=settings.sample_count)
    film = _child(sensor, "film", type="hdrfilm")
    _child(film, "integer", name="width", value=camera.width)
    _child(film, "integer", name="height", value=camera.height)


def export_scene_xml(prims: Sequence[FlatPrimitive], camera: Camera,
                     settings: Optional[ExportSettings] = None) -> str:
    """Serialize primitives in flatten order plus one sensor and one integrator."""
    settings = settings or get_config().export
    default_color = get_config().interpreter.default_color

    scene = ET.Element("scene", version=settings.mitsuba_version)
    integrator = _child(scene, "integrator", type="path")
    _child(integrator, "integer", name="max_depth", value=settings.max_depth)
    _sensor(scene, camera, settings)
    for prim in prims:
        _shape(scene, prim, default_color)

    ET.indent(scene, space="    ")
    return '<?xml version="1.0" encoding="utf-8"?>\n' + ET.tostring(scene, encoding="unicode") + "\n"
