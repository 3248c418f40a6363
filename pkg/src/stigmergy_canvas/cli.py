"""
Command Line
============

USAGE:
    stigmergy-canvas run study.conf --out out/            # simulate from a config
    stigmergy-canvas run study.conf --out out/ --snapshot-every 500
    stigmergy-canvas resume out/snapshot.swrm --ticks 1000 --out more/
    stigmergy-canvas render out/snapshot.swrm --out painting.ppm
    stigmergy-canvas metrics out/snapshot.swrm            # one metrics row
    stigmergy-canvas nullrun study.conf --out null/       # uncoupled counterpart

OUTPUT DIRECTORY:
    snapshot.swrm           final world
    canvas.ppm              final painting
    metrics.tsv             sampled metrics table
    run.yaml                manifest (inputs, checksum, summary, files)
    snapshot-<tick>.swrm    periodic snapshots (--snapshot-every)

EXIT STATUS:
    0 success, 1 usage error, 2 configuration or parameter error,
    3 snapshot or file error

License: MIT
"""

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import yaml

from . import __version__
from .config import parse_config
from .engine import WorldState, init_world, run
from .errors import ObserverError, ParameterError, ResourceError, SnapshotError, SwarmCanvasError
from .metrics import MetricsRecorder, MetricsSeries, metrics_record, summarize
from .null_model import NullModelResult, null_model_run
from .render import render_world, write_ppm
from .snapshot import load_snapshot, save_snapshot

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_DATA = 3

SNAPSHOT_NAME = "snapshot.swrm"
IMAGE_NAME = "canvas.ppm"
METRICS_NAME = "metrics.tsv"
MANIFEST_NAME = "run.yaml"


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with EXIT_USAGE."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stigmergy-canvas",
        description="Deterministic stigmergic swarm painting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")

    commands = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = commands.add_parser("run", help="simulate a configuration")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--snapshot-every", type=_positive_int, metavar="N")

    p = commands.add_parser("resume", help="continue a snapshot bit-exactly")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--ticks", type=_non_negative_int, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--snapshot-every", type=_positive_int, metavar="N")

    p = commands.add_parser("render", help="render a snapshot as PPM")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--out", type=Path, required=True, help="image file")

    p = commands.add_parser("metrics", help="print the metrics of a snapshot")
    p.add_argument("snapshot", type=Path)
    p.add_argument("--layer", choices=("field", "ink"), default="field")

    p = commands.add_parser("nullrun", help="run the uncoupled, rate-matched counterpart")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    return parser


# =============================================================================
# Output helpers
# =============================================================================

def _read_config(path: Path):
    return parse_config(path.read_text(encoding="utf-8"))


def _similarity(value: float) -> Optional[float]:
    return None if math.isnan(value) else float(value)


def _ink_similarity(result: NullModelResult) -> Dict[str, Optional[float]]:
    pair = result.ink_similarity()
    if pair is None:
        return {}
    return {"coupled_ink_similarity": _similarity(pair[0]), "null_ink_similarity": _similarity(pair[1])}



def _write_outputs(
    world: WorldState,
    series: MetricsSeries,
    out: Path,
    manifest: Dict[str, Any],
    extra_files: Sequence[str] = (),
) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    checksum = save_snapshot(world, out / SNAPSHOT_NAME)
    write_ppm(render_world(world), out / IMAGE_NAME)
    (out / METRICS_NAME).write_text(series.to_table(), encoding="utf-8")

    manifest.update(
        {
            "seed": world.params.run.seed,
            "tick": world.tick,
            "checksum": checksum,
            "total_mass": [float(m) for m in world.field.masses()],
            "deposit_events": [int(n) for n in world.ledger.deposit_events],
            "final_metrics": summarize(series.records),
            "files": [SNAPSHOT_NAME, IMAGE_NAME, METRICS_NAME, MANIFEST_NAME, *extra_files],
        }
    )
    path = out / MANIFEST_NAME
    path.write_text(yaml.safe_dump(manifest, sort_keys=False), encoding="utf-8")
    logger.info(f"Wrote {len(manifest['files'])} files to {out}")
    return path


def _advance(world: WorldState, ticks: int, out: Path, snapshot_every: Optional[int]):
    """Run ``ticks`` ticks recording metrics and optional periodic snapshots."""
    recorder = MetricsRecorder.for_params(world.params)
    snapshots: List[str] = []

    def observe(view) -> None:
        recorder(view)
        if snapshot_every and view.tick % snapshot_every == 0:
            name = f"snapshot-{view.tick}.swrm"
            save_snapshot(world, out / name)
            snapshots.append(name)

    recorder.record(world)
    run(world, ticks, observe)
    recorder.record(world)
    return recorder.series, snapshots


# =============================================================================
# Commands
# =============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    params = _read_config(args.config)
    world = init_world(params)
    args.out.mkdir(parents=True, exist_ok=True)
    series, snapshots = _advance(world, params.run.ticks, args.out, args.snapshot_every)
    _write_outputs(
        world,
        series,
        args.out,
        {"command": "run", "config": str(args.config)},
        snapshots,
    )
    return EXIT_OK


def cmd_resume(args: argparse.Namespace) -> int:
    world = load_snapshot(args.snapshot)
    start = world.tick
    # the resumed world records the total length, as a single run of it would
    world.params = replace(world.params, run=replace(world.params.run, ticks=start + args.ticks))
    args.out.mkdir(parents=True, exist_ok=True)
    series, snapshots = _advance(world, args.ticks, args.out, args.snapshot_every)
    _write_outputs(
        world,
        series,
        args.out,
        {"command": "resume", "snapshot": str(args.snapshot), "resumed_from": start},
        snapshots,
    )
    return EXIT_OK


def cmd_render(args: argparse.Namespace) -> int:
    world = load_snapshot(args.snapshot)
    write_ppm(render_world(world), args.out)
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    world = load_snapshot(args.snapshot)
    series = MetricsSeries(world.field.channels)
    series.append(metrics_record(world, layer=args.layer))
    sys.stdout.write(series.to_table())
    return EXIT_OK


def cmd_nullrun(args: argparse.Namespace) -> int:
    params = _read_config(args.config)
    result = null_model_run(params)
    _write_outputs(
        result.null_world,
        result.null,
        args.out,
        {
            "command": "nullrun",
            "config": str(args.config),
            "target_rate": float(result.target_rate),
            "realized_rate": None if result.null_rate is None else float(result.null_rate),
            "coupled_similarity": _similarity(result.coupled.final.local_similarity),
            "null_similarity": _similarity(result.null.final.local_similarity),
            **_ink_similarity(result),
        },
    )
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "resume": cmd_resume,
    "render": cmd_render,
    "metrics": cmd_metrics,
    "nullrun": cmd_nullrun,
}


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _fail(code: int, error: BaseException) -> int:
    print(f"error: {error}", file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    _configure_logging(args)

    try:
        return COMMANDS[args.command](args)
    except (ParameterError, ResourceError) as e:
        return _fail(EXIT_CONFIG, e)
    except (SnapshotError, OSError, UnicodeDecodeError) as e:
        return _fail(EXIT_DATA, e)
    except ObserverError as e:
        return _fail(EXIT_DATA if isinstance(e.cause, (SnapshotError, OSError)) else EXIT_CONFIG, e)
    except SwarmCanvasError as e:
        return _fail(EXIT_CONFIG, e)


if __name__ == "__main__":
    sys.exit(main())
