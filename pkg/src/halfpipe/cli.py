"""Command-line front end: deterministic reports and static surface exports.

Subcommands drive the library modules and write JSON/CSV files whose bytes
depend only on the config, the grid, and the seed.  Exit codes: 0 success,
2 config error, 3 numerical-budget error, 4 acceptance-threshold failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bending import BendingContext, bending_map
from .doubling import meridian_cone_angle
from .fuchsian import (
    BadTracesError,
    MulticurveComponent,
    PuncturedTorusGroup,
    TeichPoint,
    WeightedMulticurve,
    build_punctured_torus,
    kerckhoff_point,
    leaves_crossing,
)
from .geometry import ADS, HP, HYP, Geometry, GeometryError
from .transition import (
    DEFAULT_BASE_POINT,
    DEFAULT_GRID,
    EPS_LIMIT,
    extrapolate_limit,
    holonomy_family,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_THRESHOLD = 4

EPS_GEOM = 1e-10
DEFAULT_CONE_GRID = (0.2, 0.1, 0.05, 0.01)
DEFAULT_SAMPLES = 200
POLYLINE_POINTS = 24
SCHEMA_VERSION = 1

# field name -> type accepted by each output document; versioned with the repo
_SCHEMAS = {
    "transition_report": {
        "schema_version": int,
        "seed": int,
        "word": str,
        "grid": list,
        "residuals": list,
        "order_pos": (float, type(None)),
        "order_neg": (float, type(None)),
        "two_sided_gap": float,
    },
    "transition_summary": {
        "schema_version": int,
        "seed": int,
        "grid": list,
        "words": list,
        "gaps": list,
        "tolerance": float,
    },
    "kerckhoff_report": {
        "schema_version": int,
        "seed": int,
        "traces": list,
        "objective": float,
        "gradient_norm": float,
        "hessian_condition": float,
        "advisory": (str, type(None)),
    },
    "scene_export": {
        "schema_version": int,
        "seed": int,
        "vertices": list,
        "polylines": list,
        "metadata": dict,
    },
}


class ConfigError(Exception):
    """A config file could not be parsed or fails field validation."""


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _group_from_config(cfg: dict) -> PuncturedTorusGroup:
    has_traces = "traces" in cfg
    has_gens = "generators" in cfg
    if has_traces == has_gens:
        raise ConfigError("config needs exactly one of the fields 'traces' or 'generators'")
    if has_traces:
        traces = cfg["traces"]
        if not (isinstance(traces, list) and len(traces) == 3):
            raise ConfigError("field 'traces' must be a list of three numbers")
        try:
            return build_punctured_torus(TeichPoint(*map(float, traces)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'traces': {exc}") from exc
        except BadTracesError as exc:
            raise ConfigError(f"field 'traces': {exc}") from exc
    gens = cfg["generators"]
    try:
        a, b = (np.asarray(g, dtype=float).reshape(2, 2) for g in gens)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'generators' must hold two 2x2 matrices: {exc}") from exc
    traces = (float(np.trace(a)), float(np.trace(b)), float(np.trace(a @ b)))
    try:
        return build_punctured_torus(TeichPoint(*traces))
    except BadTracesError as exc:
        raise ConfigError(f"field 'generators': {exc}") from exc


def _multicurve_from_config(cfg: dict, key: str) -> WeightedMulticurve:
    table = cfg.get("multicurves")
    if not isinstance(table, dict) or key not in table:
        raise ConfigError(f"config needs field 'multicurves.{key}'")
    entries = table[key]
    if not isinstance(entries, list) or not entries:
        raise ConfigError(f"field 'multicurves.{key}' must be a non-empty list")
    components = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "word" not in entry:
            raise ConfigError(f"field 'multicurves.{key}[{i}]' needs a 'word'")
        try:
            components.append(
                MulticurveComponent(str(entry["word"]), float(entry.get("weight", 1.0)))
            )
        except (TypeError, ValueError, GeometryError) as exc:
            raise ConfigError(f"field 'multicurves.{key}[{i}]': {exc}") from exc
    try:
        return WeightedMulticurve(tuple(components))
    except GeometryError as exc:
        raise ConfigError(f"field 'multicurves.{key}': {exc}") from exc


def _grid_from(args, cfg: dict, default) -> tuple[float, ...]:
    if args.grid is not None:
        raw = args.grid.split(",")
    elif isinstance(cfg.get("grid"), list):
        raw = cfg["grid"]
    else:
        return tuple(default)
    try:
        grid = tuple(float(v) for v in raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid value: {exc}") from exc
    if not grid:
        raise ConfigError("grid must not be empty")
    return grid


def _words_from(cfg: dict) -> tuple[str, ...]:
    words = cfg.get("words", ["A", "B", "AB"])
    if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
        raise ConfigError("field 'words' must be a list of strings")
    for word in words:
        if not set(word) <= set("ABab"):
            raise ConfigError(f"field 'words': {word!r} uses letters outside A, B, a, b")
    return tuple(words)


def _finite_or_none(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


def _validate_document(doc: dict, schema_name: str) -> None:
    schema = _SCHEMAS[schema_name]
    for field, kind in schema.items():
        if field not in doc:
            raise GeometryError(f"output misses schema field '{field}' ({schema_name})")
        if not isinstance(doc[field], kind):
            raise GeometryError(
                f"output field '{field}' has type {type(doc[field]).__name__}, "
                f"violating schema {schema_name} v{SCHEMA_VERSION}"
            )


def _write_json(outdir: Path, name: str, doc: dict, schema_name: str) -> Path:
    _validate_document(doc, schema_name)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def _tag_for(t: float) -> Geometry:
    if t > 0.0:
        return HYP
    if t < 0.0:
        return ADS
    return HP


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_transition(args) -> int:
    cfg = _load_config(args.config)
    group = _group_from_config(cfg)
    lam = _multicurve_from_config(cfg, "lambda")
    grid = _grid_from(args, cfg, DEFAULT_GRID)
    words = _words_from(cfg)
    tol = args.tol if args.tol is not None else EPS_LIMIT
    outdir = Path(args.out)

    gaps = []
    for index, word in enumerate(words):
        family = holonomy_family(group, lam, 1.0, word, grid=grid)
        report = extrapolate_limit(family)
        doc = {"schema_version": SCHEMA_VERSION, "seed": args.seed}
        doc.update(report.to_json_dict())
        # converged-to-rounding sides report an infinite order; JSON has no
        # Infinity literal, so those become null
        doc["order_pos"] = _finite_or_none(doc["order_pos"])
        doc["order_neg"] = _finite_or_none(doc["order_neg"])
        _write_json(outdir, f"transition_{index:02d}_{word}.json", doc, "transition_report")
        gaps.append(float(report.two_sided_gap))
    summary = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "grid": [float(t) for t in grid],
        "words": list(words),
        "gaps": gaps,
        "tolerance": tol,
    }
    _write_json(outdir, "transition_summary.json", summary, "transition_summary")
    return EXIT_OK if all(g < tol for g in gaps) else EXIT_THRESHOLD


def cmd_kerckhoff(args) -> int:
    cfg = _load_config(args.config)
    group = _group_from_config(cfg)
    lam = _multicurve_from_config(cfg, "lambda")
    mu = _multicurve_from_config(cfg, "mu")
    tol = args.tol if args.tol is not None else 1e-7
    result = kerckhoff_point(lam, mu, group.trace_point, gradient_tol=tol)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "traces": [float(result.point.x), float(result.point.y), float(result.point.z)],
        "objective": float(result.objective),
        "gradient_norm": float(result.gradient_norm),
        "hessian_condition": float(result.hessian_condition),
        "advisory": result.advisory,
    }
    _write_json(Path(args.out), "kerckhoff.json", doc, "kerckhoff_report")
    return EXIT_OK if result.gradient_norm < tol else EXIT_NUMERICAL


def cmd_double(args) -> int:
    cfg = _load_config(args.config)
    group = _group_from_config(cfg)
    lam = _multicurve_from_config(cfg, "lambda")
    grid = _grid_from(args, cfg, DEFAULT_CONE_GRID)
    if any(t <= 0.0 for t in grid):
        raise ConfigError("cone-angle grid values must be positive")
    slope_tol = args.tol if args.tol is not None else 1e-8
    hp_tol = args.tol if args.tol is not None else 1e-6
    base = np.asarray(cfg.get("base_point", list(DEFAULT_BASE_POINT)), dtype=float)

    rows = []
    slope_gap = 0.0
    hp_gap = 0.0
    for component in lam.components:
        per_tag_angles = {}
        for tag in (HYP, ADS, HP):
            ctx = BendingContext(
                group=group, multicurve=lam, base_point=base, tag=tag, sign=1.0, scale=1.0
            )
            angles = [float(meridian_cone_angle(ctx, component.word, t)) for t in grid]
            per_tag_angles[tag] = angles
            rows.extend(
                (tag.name.lower(), component.word, float(component.weight), float(t), angle)
                for t, angle in zip(grid, angles)
            )
        # the doubled metrics close up affinely: slope -2 * weight on each side
        if len(grid) >= 2:
            for tag in (HYP, ADS):
                slope = float(np.polyfit(np.array(grid), np.array(per_tag_angles[tag]), 1)[0])
                slope_gap = max(slope_gap, abs(slope + 2.0 * component.weight))
        hp_gap = max(
            hp_gap,
            max(
                abs(angle + 2.0 * component.weight * t)
                for t, angle in zip(grid, per_tag_angles[HP])
            ),
        )

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["geometry", "word", "weight", "t", "cone_angle"])
    for geometry, word, weight, t, angle in rows:
        writer.writerow([geometry, word, repr(weight), repr(t), repr(angle)])
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "cone_angles.csv").write_text(buffer.getvalue())
    return EXIT_OK if slope_gap < slope_tol and hp_gap < hp_tol else EXIT_THRESHOLD


@dataclass(frozen=True)
class SceneExport:
    """Static mesh of a bent surface in an affine chart.

    Vertices are affine 3-coordinates of bending-map images; polylines trace
    the bending lines.  Every vertex must satisfy the chart's model-region
    inequality within a small tolerance.
    """

    vertices: tuple
    polylines: tuple
    metadata: dict

    def to_json_dict(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "polylines": [[list(p) for p in line] for line in self.polylines],
            "metadata": dict(self.metadata),
        }


def _check_region(tag: Geometry, vertex: np.ndarray, tol: float) -> None:
    x, y, h = (float(c) for c in vertex)
    disk = x * x + y * y
    if tag is HYP:
        inside = disk + h * h < 1.0 + tol
    elif tag is ADS:
        inside = disk - h * h < 1.0 + tol
    else:
        inside = disk < 1.0 + tol
    if not inside:
        raise GeometryError(f"exported vertex {vertex} leaves the {tag.name} chart region")


def _sample_disk(rng: np.random.Generator, count: int, radius: float = 0.55) -> np.ndarray:
    angles = rng.uniform(0.0, 2.0 * math.pi, size=count)
    radii = radius * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    return np.stack((radii * np.cos(angles), radii * np.sin(angles)), axis=1)


def _leaf_polyline(ctx: BendingContext, leaf, tol: float) -> list:
    start, end = leaf.ideal_endpoints_klein()
    points = []
    for u in np.linspace(0.02, 0.98, POLYLINE_POINTS):
        z = (1.0 - u) * start + u * end
        vertex = bending_map(ctx, z).affine_chart()
        _check_region(ctx.tag, vertex, tol)
        points.append([float(c) for c in vertex])
    return points


def cmd_export_surface(args) -> int:
    cfg = _load_config(args.config)
    group = _group_from_config(cfg)
    lam = _multicurve_from_config(cfg, "lambda")
    grid = _grid_from(args, cfg, (0.1,))
    samples = cfg.get("samples", DEFAULT_SAMPLES)
    if not isinstance(samples, int) or samples <= 0:
        raise ConfigError("field 'samples' must be a positive integer")
    tol = args.tol if args.tol is not None else EPS_GEOM
    t = float(grid[0])
    tag = _tag_for(t)
    base = np.asarray(cfg.get("base_point", list(DEFAULT_BASE_POINT)), dtype=float)
    ctx = BendingContext(
        group=group,
        multicurve=lam,
        base_point=base,
        tag=tag,
        sign=1.0 if t >= 0.0 else -1.0,
        scale=abs(t),
    )

    rng = np.random.default_rng(args.seed)
    disk_points = _sample_disk(rng, samples)
    vertices = []
    seen_leaves = {}
    for z in disk_points:
        vertex = bending_map(ctx, z).affine_chart()
        _check_region(tag, vertex, tol)
        vertices.append(tuple(float(c) for c in vertex))
        for crossing in leaves_crossing(group, lam, base, z):
            key = tuple(np.round(crossing.leaf.normal, 9))
            seen_leaves.setdefault(key, crossing.leaf)
    polylines = tuple(
        _leaf_polyline(ctx, leaf, tol) for _, leaf in sorted(seen_leaves.items())
    )

    scene = SceneExport(
        vertices=tuple(vertices),
        polylines=polylines,
        metadata={
            "geometry": tag.name.lower(),
            "t": t,
            "multicurve": [
                {"word": c.word, "weight": c.weight} for c in lam.components
            ],
            "chart": "x0=1",
        },
    )
    doc = {"schema_version": SCHEMA_VERSION, "seed": args.seed}
    doc.update(scene.to_json_dict())
    _write_json(Path(args.out), "scene.json", doc, "scene_export")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry point.
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="halfpipe",
        description="Deterministic reports and exports for bent geometric structures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "transition": (cmd_transition, "Extrapolate rescaled holonomy families per word."),
        "kerckhoff": (cmd_kerckhoff, "Locate the combined-length critical point."),
        "double": (cmd_double, "Tabulate meridian cone angles of the doubled metrics."),
        "export-surface": (cmd_export_surface, "Export a bent surface mesh with bending lines."),
    }
    for name, (handler, help_text) in handlers.items():
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="JSON config path")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument(
            "--grid",
            default=None,
            help="comma-separated t values overriding the config grid "
            "(sign selects the geometry: +t collapsing, -t expanding, 0 flat)",
        )
        cmd.add_argument("--seed", type=int, default=0, help="seed recorded in outputs")
        cmd.add_argument("--tol", type=float, default=None, help="threshold override")
        cmd.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GeometryError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
