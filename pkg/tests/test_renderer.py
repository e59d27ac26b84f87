import json
import math

import numpy as np
import pytest
from PIL import Image as PILImage

from src.core.config import CameraSettings, RendererSettings, load_config, render_threads
from src.core.errors import ArtifactIOError, InvalidArgumentError
from src.core.transforms import IDENTITY, scale, translate
from src.language.interpreter import execute
from src.rendering.camera import Camera, Projection
from src.rendering.image_io import format_for, save_image, save_label_map, save_layout
from src.rendering.intersect import intersect_batch, intersect_ray_primitive
from src.rendering.layout import auto_camera, project_layout
from src.rendering.renderer import id_color, render, word_color
from src.scene.model import FlatPrimitive, PrimitiveSpec
from src.scene.queries import aabb_corners, flatten, prims_aabb

from tests.conftest import load_fixture

UNIT_SPHERE = PrimitiveSpec("sphere", radius=1.0)


def flat(spec, world=IDENTITY, eid=1, word="thing", group=1):
    return FlatPrimitive(spec, world, (eid - 1,), word, eid, group)


def front_camera(width=64, height=64, distance=10.0, fov_deg=40.0):
    return Camera((0, 0, distance), (0, 0, 0), (0, 1, 0),
                  Projection.perspective(math.radians(fov_deg)), width, height)


def fixture_prims(name):
    root, _ = execute(load_fixture(name))
    return flatten(root)


# Camera

def test_camera_rejects_degenerate_setups():
    with pytest.raises(InvalidArgumentError):
        Camera((0, 0, 0), (0, 0, 0), (0, 1, 0), Projection.perspective(1.0), 8, 8)
    with pytest.raises(InvalidArgumentError):
        Camera((0, 5, 0), (0, 0, 0), (0, 1, 0), Projection.perspective(1.0), 8, 8)
    with pytest.raises(InvalidArgumentError):
        Projection.perspective(math.pi)
    with pytest.raises(InvalidArgumentError):
        Projection.orthographic(0)


def test_camera_from_values_reads_optional_fov():
    cam = Camera.from_values([0, 0, 5, 0, 0, 0, 0, 1, 0, 90], 40.0, 10, 10)
    assert cam.projection.value == pytest.approx(math.pi / 2)
    with pytest.raises(InvalidArgumentError):
        Camera.from_values([0, 0, 5], 40.0, 10, 10)


def test_center_ray_looks_forward():
    origins, dirs = front_camera(1, 1).rays()
    assert dirs[0] == pytest.approx((0, 0, -1))
    assert origins[0] == pytest.approx((0, 0, 10))


def test_projection_of_the_target_is_the_image_center():
    uv, depth = front_camera().project(np.array([[0.0, 0.0, 0.0], [0.0, 1.0, 0.0]]))
    assert uv[0] == pytest.approx((0.5, 0.5))
    assert uv[1][1] < 0.5
    assert depth == pytest.approx((10, 10))


# Intersection

def test_ray_hits_unit_sphere_front():
    t, normal = intersect_ray_primitive((0, 0, -5), (0, 0, 1), flat(UNIT_SPHERE))
    assert t == pytest.approx(4.0)
    assert normal == pytest.approx((0, 0, -1))


def test_ray_hits_translated_sphere():
    prim = flat(UNIT_SPHERE, translate((3, 0, 0)))
    t, normal = intersect_ray_primitive((3, 0, -5), (0, 0, 1), prim)
    assert t == pytest.approx(4.0)
    assert intersect_ray_primitive((0, 0, -5), (0, 0, 1), prim) is None


def test_scaled_sphere_distance_is_in_world_units():
    prim = flat(UNIT_SPHERE, scale((2, 2, 2)))
    t, _ = intersect_ray_primitive((0, 0, -5), (0, 0, 1), prim)
    assert t == pytest.approx(3.0)


def test_parallel_ray_misses_cube():
    cube = flat(PrimitiveSpec("cube", size=(1, 1, 1)))
    assert intersect_ray_primitive((0, 2, -5), (0, 0, 1), cube) is None
    t, normal = intersect_ray_primitive((0, 0, -5), (0, 0, 1), cube)
    assert t == pytest.approx(4.5)
    assert normal == pytest.approx((0, 0, -1))


def test_ray_from_inside_hits_the_far_side():
    t, normal = intersect_ray_primitive((0, 0, 0), (1, 0, 0), flat(UNIT_SPHERE))
    assert t == pytest.approx(1.0)
    assert normal == pytest.approx((-1, 0, 0))


def test_cylinder_side_and_cap():
    can = flat(PrimitiveSpec("cylinder", radius=0.5, p0=(0, 0, 0), p1=(0, 2, 0)))
    t, normal = intersect_ray_primitive((-5, 1, 0), (1, 0, 0), can)
    assert t == pytest.approx(4.5)
    assert normal == pytest.approx((-1, 0, 0))
    t, normal = intersect_ray_primitive((0, 5, 0), (0, -1, 0), can)
    assert t == pytest.approx(3.0)
    assert normal == pytest.approx((0, 1, 0))
    assert intersect_ray_primitive((-5, 3, 0), (1, 0, 0), can) is None


def test_batch_misses_are_infinite():
    origins = np.array([[0.0, 0.0, -5.0], [5.0, 5.0, -5.0]])
    dirs = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
    t, _ = intersect_batch(origins, dirs, flat(UNIT_SPHERE))
    assert np.isfinite(t[0]) and np.isinf(t[1])


# Rendering

def test_orthographic_sphere_coverage():
    cam = Camera((0, 0, 10), (0, 0, 0), (0, 1, 0), Projection.orthographic(4.0), 512, 512)
    image = render([flat(UNIT_SPHERE)], cam, "instance")
    assert image.hit_fraction == pytest.approx(math.pi / 16, abs=0.02)


def test_empty_scene_is_background():
    image = render([], front_camera(8, 8), "shaded")
    assert (image.pixels == 255).all()
    assert image.label_set() == []


def test_shaded_pixels_use_primitive_color():
    red = PrimitiveSpec("sphere", color=(1.0, 0.0, 0.0), radius=1.0)
    settings = RendererSettings(ambient=1.0, light_intensity=0.0)
    image = render([flat(red)], front_camera(9, 9), "shaded", settings)
    assert tuple(image.pixels[4, 4]) == (255, 0, 0)
    assert tuple(image.pixels[0, 0]) == (255, 255, 255)


def test_nearer_primitive_wins():
    near = flat(UNIT_SPHERE, translate((0, 0, 2)), eid=2)
    far = flat(UNIT_SPHERE, IDENTITY, eid=1)
    image = render([far, near], front_camera(9, 9), "instance")
    assert image.labels[4, 4] == 2


def test_coincident_primitives_resolve_to_lower_id():
    image = render([flat(UNIT_SPHERE, eid=7), flat(UNIT_SPHERE, eid=3)], front_camera(9, 9),
                   "instance")
    assert image.label_set() == [3]


def test_depth_mode_peaks_at_nearest_point():
    image = render([flat(UNIT_SPHERE)], front_camera(9, 9), "depth")
    assert image.pixels[4, 4, 0] == 255
    assert image.pixels[0, 0, 0] == 0


def test_unknown_mode():
    with pytest.raises(InvalidArgumentError):
        render([], front_camera(4, 4), "wireframe")


def test_instance_labels_partition_visible_primitives():
    prims = fixture_prims("three_objects.sl")
    cam = auto_camera(prims, width=96, height=96)
    image = render(prims, cam, "instance")
    ids = {p.embedding_id for p in prims}
    assert set(image.label_set()) == ids
    for label in image.label_set():
        mask = image.labels == label
        assert (image.pixels[mask] == id_color(label)).all()
    assert (image.pixels[image.labels == 0] == 0).all()


def test_semantic_labels_coarsen_instances():
    prims = fixture_prims("moai.sl")
    cam = auto_camera(prims, width=96, height=96)
    instance = render(prims, cam, "instance")
    semantic = render(prims, cam, "semantic")
    assert sorted(semantic.legend.values()) == ["body", "head"]
    for label in instance.label_set():
        assert len(np.unique(semantic.labels[instance.labels == label])) == 1
    assert ((instance.labels == 0) == (semantic.labels == 0)).all()


def test_correspondence_labels_share_repeated_parts():
    prims = fixture_prims("moai.sl")
    image = render(prims, auto_camera(prims, width=96, height=96), "correspondence")
    heads = {p.group_id for p in prims if p.word == "head"}
    assert len(heads) == 1
    assert len(image.label_set()) == len({p.group_id for p in prims})


def test_word_colors_are_stable_and_ids_distinct():
    assert word_color("pawn") == word_color("pawn")
    assert id_color(0) == (0, 0, 0)
    assert len({id_color(i) for i in range(1, 65)}) == 64


def test_thread_count_does_not_change_output():
    prims = fixture_prims("chessboard.sl")
    cam = auto_camera(prims, width=80, height=80)
    settings = RendererSettings(tile_rows=8)
    single = render(prims, cam, "shaded", settings, threads=1)
    multi = render(prims, cam, "shaded", settings, threads=4)
    assert np.array_equal(single.pixels, multi.pixels)
    assert np.array_equal(single.labels, multi.labels)


def test_thread_count_from_the_environment(monkeypatch):
    monkeypatch.setenv("SCENELANG_THREADS", "0")
    assert render_threads(RendererSettings(threads=6)) == 1
    monkeypatch.setenv("SCENELANG_THREADS", "3")
    assert render_threads(RendererSettings(threads=6)) == 3
    monkeypatch.delenv("SCENELANG_THREADS")
    assert render_threads(RendererSettings(threads=6)) == 6


@pytest.mark.parametrize("name", ["SCENELANG_THREADS", "SCENELANG_MAX_DEPTH"])
def test_non_integer_environment_values_are_rejected(name, monkeypatch, tmp_path):
    monkeypatch.setenv(name, "many")
    with pytest.raises(InvalidArgumentError, match=name):
        load_config(tmp_path / "missing.yaml")
    if name == "SCENELANG_THREADS":
        with pytest.raises(InvalidArgumentError, match=name):
            render_threads(RendererSettings())


# Layout and framing

def test_auto_camera_keeps_scene_in_view():
    prims = fixture_prims("chessboard.sl")
    cam = auto_camera(prims, width=120, height=80)
    lo, hi = prims_aabb(prims)
    uv, depth = cam.project(aabb_corners(lo, hi))
    assert (depth > 0).all()
    assert ((uv >= 0) & (uv <= 1)).all()


def test_auto_camera_reads_the_position_as_a_direction():
    prims = fixture_prims("two_cubes.sl")
    settings = CameraSettings()
    cam = auto_camera(prims, settings, width=64, height=64)
    offset = cam.position.as_array() - cam.look_at.as_array()
    expected = np.array(settings.position) / np.linalg.norm(settings.position)
    assert offset / np.linalg.norm(offset) == pytest.approx(expected)
    assert cam.look_at == pytest.approx((0, 0, 0))
    big = auto_camera([flat(UNIT_SPHERE, scale((50, 50, 50)))], settings, width=64, height=64)
    assert np.linalg.norm(big.position.as_array()) > np.linalg.norm(offset)


def test_auto_camera_for_empty_scene():
    cam = auto_camera([], width=10, height=10)
    assert cam.look_at == (0, 0, 0)


def test_layout_of_centered_cube():
    (box,) = project_layout([flat(PrimitiveSpec("cube", size=(1, 1, 1)))], front_camera())
    x0, y0, x1, y1 = box.rect
    assert (x0 + x1) / 2 == pytest.approx(0.5)
    assert (y0 + y1) / 2 == pytest.approx(0.5)
    assert box.to_json()["embedding_id"] == 1


def test_layout_of_two_cubes_is_mirror_symmetric():
    left, right = project_layout(fixture_prims("two_cubes.sl"), front_camera())
    assert left.rect[0] == pytest.approx(1 - right.rect[2])
    assert left.rect[2] == pytest.approx(1 - right.rect[0])
    assert left.rect[1] == pytest.approx(right.rect[1])
    assert left.rect[2] < 0.5 < right.rect[0]


def test_layout_drops_primitives_behind_the_camera(log_messages):
    cube = PrimitiveSpec("cube", size=(1, 1, 1))
    boxes = project_layout([flat(cube, eid=1), flat(cube, translate((0, 0, 20)), eid=2)],
                           front_camera())
    assert [b.embedding_id for b in boxes] == [1]
    assert any("behind the camera" in m for m in log_messages)


# Image files

def test_ppm_round_trip(tmp_path):
    prims = fixture_prims("two_cubes.sl")
    image = render(prims, auto_camera(prims, width=24, height=16), "instance")
    path = tmp_path / "out.ppm"
    save_image(image, path)
    assert path.read_bytes().startswith(b"P6")
    assert np.array_equal(np.asarray(PILImage.open(path)), image.pixels)


def test_label_map_and_layout_files(tmp_path):
    prims = fixture_prims("two_cubes.sl")
    cam = auto_camera(prims, width=12, height=10)
    image = render(prims, cam, "instance")
    save_label_map(image, tmp_path / "labels.json")
    save_layout(project_layout(prims, cam), tmp_path / "layout.json")
    labels = json.loads((tmp_path / "labels.json").read_text())
    assert (labels["width"], labels["height"]) == (12, 10)
    assert len(labels["labels"]) == 120
    layout = json.loads((tmp_path / "layout.json").read_text())
    assert [b["label"] for b in layout] == ["cube", "cube"]


def test_image_write_failures(tmp_path):
    image = render([], front_camera(4, 4))
    with pytest.raises(ArtifactIOError):
        save_image(image, tmp_path / "missing" / "out.ppm")
    with pytest.raises(ArtifactIOError):
        save_image(image, tmp_path / "out.gif", fmt="gif")


def test_format_from_suffix():
    assert format_for("a.PNG") == "png"
    assert format_for("a.bin") == "ppm"
