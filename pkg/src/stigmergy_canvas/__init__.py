"""
Stigmergy Canvas - Unified Entry Point
======================================

A deterministic swarm of painter agents that coordinate only through the
ink they leave on a shared multi-channel canvas.

- habitat: the canvas field (deposit, sense, evaporate, diffuse)
- agents: response-threshold deposition and stimulus-biased movement
- engine: the seeded tick loop, snapshots and resume
- metrics: entropy, local similarity, coverage, and the null model
- config / render / cli: documents, PPM paintings, command line

QUICK START:
    import stigmergy_canvas as sc

    params = sc.parse_config(open("study.conf").read())
    world = sc.simulate(params)
    open("painting.ppm", "wb").write(sc.render_world(world))
    print(sc.metrics_record(world))

    # Stop and continue later, bit-exactly
    sc.save_snapshot(world, "study.swrm")
    world = sc.run(sc.load_snapshot("study.swrm"), 1000)

    # Is the order emergent? Compare against the uncoupled swarm
    result = sc.null_model_run(params)

License: MIT
"""

import logging
from pathlib import Path
from typing import Union

__version__ = "0.1.0"

from .agents import (
    AgentState,
    BehaviorParams,
    DepositEvent,
    MoveOption,
    agent_step,
    deposit_probability,
    movement_distribution,
    movement_weight,
    perceived_stimulus,
)
from .config import parse_config, serialize_config
from .engine import InkLedger, WorldState, WorldView, init_world, run, simulate, step
from .errors import (
    BoundsError,
    ConfigError,
    FieldError,
    ObserverError,
    ParameterError,
    ResourceError,
    SnapshotError,
    SwarmCanvasError,
    UndefinedMetricError,
)
from .habitat import (
    Boundary,
    CanvasField,
    deposit,
    diffuse,
    evaporate,
    new_field,
    sense,
    total_mass,
)
from .metrics import (
    MetricsRecord,
    MetricsRecorder,
    MetricsSeries,
    coverage,
    local_similarity,
    metrics_record,
    spatial_entropy,
)
from .null_model import NullModelResult, emergence_trial, null_model_run, null_params
from .params import SimParams
from .render import Palette, palette_from_params, read_ppm, render_image, render_world
from .snapshot import decode_snapshot, encode_snapshot, load_snapshot, save_snapshot, snapshot_checksum

logger = logging.getLogger(__name__)

__all__ = [
    # Version
    "__version__",
    # Habitat
    "Boundary",
    "CanvasField",
    "new_field",
    "deposit",
    "sense",
    "evaporate",
    "diffuse",
    "total_mass",
    # Agents
    "AgentState",
    "BehaviorParams",
    "DepositEvent",
    "MoveOption",
    "perceived_stimulus",
    "deposit_probability",
    "movement_weight",
    "movement_distribution",
    "agent_step",
    # Engine
    "SimParams",
    "InkLedger",
    "WorldState",
    "WorldView",
    "init_world",
    "step",
    "run",
    "simulate",
    "encode_snapshot",
    "decode_snapshot",
    "save_snapshot",
    "load_snapshot",
    "snapshot_checksum",
    # Metrics
    "MetricsRecord",
    "MetricsSeries",
    "MetricsRecorder",
    "spatial_entropy",
    "local_similarity",
    "coverage",
    "metrics_record",
    "NullModelResult",
    "null_params",
    "null_model_run",
    "emergence_trial",
    # IO
    "parse_config",
    "serialize_config",
    "load_config",
    "Palette",
    "palette_from_params",
    "render_image",
    "render_world",
    "read_ppm",
    # Errors
    "SwarmCanvasError",
    "ParameterError",
    "BoundsError",
    "ResourceError",
    "FieldError",
    "ConfigError",
    "SnapshotError",
    "ObserverError",
    "UndefinedMetricError",
]


# =============================================================================
# Convenience Functions
# =============================================================================

def load_config(path: Union[str, Path]) -> SimParams:
    """
    Parse a configuration file.

    Example:
        params = load_config("study.conf")
    """
    path = Path(path)
    params = parse_config(path.read_text(encoding="utf-8"))
    logger.debug(f"Loaded configuration {path}")
    return params
