"""``scenelang`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 parse/validation error,
3 execution error, 4 I/O error. Diagnostics go to standard error.
"""

import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import click
from loguru import logger
from rich.console import Console

from src import __version__
from src.backends.animation import export_animation
from src.backends.minecraft import (
    compile_minecraft, load_palette, voxels_to_json, voxels_to_primitives,
)
from src.backends.scene_xml import export_scene_xml
from src.core.config import get_config
from src.core.errors import ArtifactIOError, SceneLanguageError, SourceError, ValidationFailed
from src.core.log_setup import configure_logging
from src.editing.overrides import apply_overrides, load_overrides
from src.editing.rebind import rebind
from src.language import ast
from src.language.interpreter import execute, execute_temporal
from src.language.parser import parse
from src.language.printer import pretty_print
from src.language.validator import errors_only, format_diagnostic, validate
from src.rendering.camera import Camera
from src.rendering.image_io import format_for, label_map_json, save_image
from src.rendering.layout import auto_camera, project_layout
from src.rendering.renderer import MODES, render
from src.scene.model import FlatPrimitive
from src.scene.queries import computation_graph, flatten, graph_to_dot
from src.scene.serialization import entity_to_json

err_console = Console(stderr=True, highlight=False, soft_wrap=True)

STDOUT = "-"


# Input / output helpers

def load_program(path: str) -> ast.Program:
    """Read, parse and validate; warnings are printed, errors raise."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(path, e.strerror or str(e)) from e
    try:
        program = parse(text, filename=path)
    except SourceError as e:
        e.filename = path
        raise
    diagnostics = validate(program)
    for diag in diagnostics:
        if not diag.is_error:
            err_console.print(format_diagnostic(diag, path), markup=False)
    errors = errors_only(diagnostics)
    if errors:
        failure = ValidationFailed(errors)
        failure.filename = path
        raise failure
    return program


def write_text(out: str, text: str) -> None:
    if out == STDOUT:
        click.echo(text, nl=False)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(out, e.strerror or str(e)) from e
    logger.info(f"Wrote {out}")


def write_json(out: str, payload) -> None:
    write_text(out, json.dumps(payload, indent=2) + "\n")


def _parse_size(ctx, param, value: Optional[str]) -> Optional[Tuple[int, int]]:
    if value is None:
        return None
    try:
        w, h = (int(v) for v in value.lower().split("x"))
    except ValueError:
        raise click.BadParameter("expected WIDTHxHEIGHT, e.g. 512x512") from None
    if w < 1 or h < 1:
        raise click.BadParameter("width and height must be positive")
    return w, h


def _parse_camera(ctx, param, value: Optional[str]) -> Optional[Tuple[float, ...]]:
    if value is None:
        return None
    try:
        numbers = tuple(float(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter("expected comma-separated numbers") from None
    if len(numbers) not in (9, 10):
        raise click.BadParameter("expected pos(3),look_at(3),up(3)[,fov_deg]")
    return numbers


def make_camera(prims: Sequence[FlatPrimitive], size: Optional[Tuple[int, int]],
                camera: Optional[Tuple[float, ...]]) -> Camera:
    settings = get_config().camera
    width, height = size or (settings.width, settings.height)
    if camera is not None:
        return Camera.from_values(camera, settings.fov_deg, width, height)
    return auto_camera(prims, settings, width, height)


def _scene_prims(program: ast.Program, entry: Optional[str], max_depth: Optional[int],
                 minecraft: bool) -> List[FlatPrimitive]:
    if minecraft:
        palette = load_palette()
        grid = compile_minecraft(program, palette, entry, max_depth)
        return voxels_to_primitives(grid, palette)
    root, _ = execute(program, entry, max_depth)
    return flatten(root)


# Commands

entry_option = click.option("--entry", default=None, help="Root word (required when ambiguous).")
depth_option = click.option("--max-depth", type=click.IntRange(min=1), default=None,
                            help="Recursion depth limit (default from config).")
size_option = click.option("--size", callback=_parse_size, default=None,
                           help="Image size WIDTHxHEIGHT (default 512x512).")
camera_option = click.option("--camera", callback=_parse_camera, default=None,
                             help="pos,look_at,up[,fov_deg] as 9 or 10 numbers.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--log-level", default=None,
              type=click.Choice(["TRACE", "DEBUG", "INFO", "WARNING", "ERROR"],
                                case_sensitive=False),
              help="Logging level (default from config).")
@click.option("--log-file", default=None, type=click.Path(dir_okay=False),
              help="Also log to this file.")
@click.version_option(version=__version__, prog_name="scenelang")
def cli(log_level: Optional[str], log_file: Optional[str]):
    """Parse, execute, render and export Scene Language programs."""
    configure_logging(get_config().logging, log_level, log_file)


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
def check(file: str):
    """Parse and validate FILE."""
    load_program(file)


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@entry_option
@depth_option
@click.option("--out", default=STDOUT, help="Entity JSON path ('-' for stdout).")
@click.option("--report", is_flag=True, help="Wrap the entity with an execution report.")
def run(file: str, entry: Optional[str], max_depth: Optional[int], out: str, report: bool):
    """Execute FILE and print the entity tree as JSON."""
    program = load_program(file)
    root, exec_report = execute(program, entry, max_depth)
    payload = entity_to_json(root)
    if report:
        payload = {"entity": payload, "report": exec_report.to_json()}
    write_json(out, payload)


@cli.command("render")
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="shaded", show_default=True)
@size_option
@camera_option
@entry_option
@depth_option
@click.option("--minecraft", is_flag=True, help="Compile to voxels and render the blocks.")
@click.option("--labels", default=None, type=click.Path(dir_okay=False),
              help="Also write the label map as JSON.")
@click.option("--out", default="render.ppm", show_default=True,
              help="Image path (.ppm or .png; '-' writes PPM to stdout).")
def render_cmd(file: str, mode: str, size, camera, entry: Optional[str],
               max_depth: Optional[int], minecraft: bool, labels: Optional[str], out: str):
    """Ray trace FILE to an image or discriminative map."""
    program = load_program(file)
    prims = _scene_prims(program, entry, max_depth, minecraft)
    image = render(prims, make_camera(prims, size, camera), mode)
    if out == STDOUT:
        save_image(image, sys.stdout.buffer, "ppm")
        sys.stdout.buffer.flush()
    else:
        save_image(image, out, format_for(out))
        logger.info(f"Wrote {out}")
    if labels:
        write_json(labels, label_map_json(image))


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["xml", "minecraft", "layout"]),
              required=True)
@size_option
@camera_option
@entry_option
@depth_option
@click.option("--out", default=STDOUT, help="Output path ('-' for stdout).")
def export(file: str, fmt: str, size, camera, entry: Optional[str], max_depth: Optional[int],
           out: str):
    """Export FILE as scene XML, Minecraft voxels or a 2D layout."""
    program = load_program(file)
    if fmt == "minecraft":
        grid = compile_minecraft(program, load_palette(), entry, max_depth)
        write_json(out, voxels_to_json(grid))
        return
    prims = _scene_prims(program, entry, max_depth, minecraft=False)
    cam = make_camera(prims, size, camera)
    if fmt == "xml":
        write_text(out, export_scene_xml(prims, cam))
    else:
        write_json(out, [box.to_json() for box in project_layout(prims, cam)])


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--out-dir", default="frames", show_default=True, type=click.Path(file_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="shaded", show_default=True)
@click.option("--tracks", is_flag=True, help="Also write tracks.json with leaf centers.")
@size_option
@camera_option
@entry_option
@depth_option
def animate(file: str, out_dir: str, mode: str, tracks: bool, size, camera,
            entry: Optional[str], max_depth: Optional[int]):
    """Render every frame of a 4D entity function."""
    program = load_program(file)
    frames, _ = execute_temporal(program, entry, max_depth)
    if not frames:
        raise SceneLanguageError("4D entity function produced no frames")
    all_prims = [p for frame in frames for p in flatten(frame)]
    cam = make_camera(all_prims, size, camera)
    export_animation(frames, cam, out_dir, mode=mode, with_tracks=tracks)


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@entry_option
@depth_option
@click.option("--out", default=STDOUT, help="DOT path ('-' for stdout).")
def graph(file: str, entry: Optional[str], max_depth: Optional[int], out: str):
    """Write the computation graph of FILE in Graphviz DOT."""
    program = load_program(file)
    root, _ = execute(program, entry, max_depth)
    write_text(out, graph_to_dot(computation_graph(root), name=root.word))


@cli.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--overrides", default=None, type=click.Path(dir_okay=False),
              help="JSON list of attribute overrides.")
@click.option("--rebind", "rebinds", nargs=2, multiple=True, metavar="WORD SOURCE_FILE",
              help="Bind WORD to the entity function in SOURCE_FILE (repeatable).")
@entry_option
@depth_option
@click.option("--out", default=STDOUT, help="Edited program path ('-' for stdout).")
def edit(file: str, overrides: Optional[str], rebinds: Sequence[Tuple[str, str]],
         entry: Optional[str], max_depth: Optional[int], out: str):
    """Apply rebinds, then overrides, and print the edited program."""
    program = load_program(file)
    for word, source in rebinds:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as e:
            raise ArtifactIOError(source, e.strerror or str(e)) from e
        program = rebind(program, word, text)
    if overrides:
        program = apply_overrides(program, load_overrides(overrides), entry, max_depth)
    write_text(out, pretty_print(program))


# Entry points

def report_error(error: SceneLanguageError) -> None:
    if isinstance(error, ValidationFailed):
        filename = getattr(error, "filename", "<input>")
        for diag in error.diagnostics:
            err_console.print(format_diagnostic(diag, filename), markup=False)
        return
    span = getattr(error, "span", None)
    where = getattr(error, "filename", None)
    if span is not None:
        where = f"{where or '<input>'}:{span.line}:{span.column}"
    prefix = f"{where}: " if where else ""
    err_console.print(f"{prefix}error: {error.message}", markup=False)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="scenelang",
                 standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except SceneLanguageError as e:
        report_error(e)
        return e.exit_code
    return 0


def run_cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run_cli()
