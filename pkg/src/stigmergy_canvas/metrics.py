"""
Metrics - Measuring Emergent Order
==================================

Three views on spatial order, all pure functions of a field:

- spatial_entropy: Shannon entropy (bits) of one channel's ink
  distribution over cells; lower means more concentrated
- local_similarity: mean cosine between each painted cell's color vector
  and its painted Moore neighbors' mean color; higher means more
  chromatically coherent patches
- coverage: fraction of cells whose summed intensity exceeds a threshold

A blank channel has entropy log2(cells): no ink carries no spatial
information, so it counts as maximal disorder.

License: MIT
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .engine import WorldState, WorldView
from .errors import ParameterError, UndefinedMetricError
from .habitat import MOORE_OFFSETS, CanvasField, add_shifted

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 9


# =============================================================================
# Field statistics
# =============================================================================

def spatial_entropy(field: CanvasField, channel: int) -> float:
    """Entropy in bits of channel ``channel`` normalized to a distribution over cells."""
    total = field.total_mass(channel)
    h_max = math.log2(field.cell_count)
    if total <= 0:
        return h_max

    values = field.values[:, :, channel]
    p = values[values > 0] / total
    h = float(-np.sum(p * np.log2(p)))
    return min(max(0.0, h), h_max)


def local_similarity(field: CanvasField) -> float:
    """
    Mean chromatic agreement between painted cells and their painted neighbors.

    Cells with no painted neighbor contribute 0.

    Raises:
        UndefinedMetricError: if no cell carries ink
    """
    values = field.values
    positive = values.sum(axis=2) > 0
    if not positive.any():
        raise UndefinedMetricError("local_similarity is undefined on a blank field")

    masked = values * positive[:, :, None]
    neighbor_sum = np.zeros_like(values)
    neighbor_count = np.zeros(positive.shape, dtype=np.int64)
    painted = positive.astype(np.int64)
    for dx, dy in MOORE_OFFSETS[1:]:
        add_shifted(neighbor_sum, masked, dx, dy, field.boundary)
        add_shifted(neighbor_count, painted, dx, dy, field.boundary)

    # cosine is scale-free, so the neighbor sum stands in for the neighbor mean
    dot = np.einsum("yxc,yxc->yx", values, neighbor_sum)
    norms = np.sqrt(np.einsum("yxc,yxc->yx", values, values)) * np.sqrt(
        np.einsum("yxc,yxc->yx", neighbor_sum, neighbor_sum)
    )
    has_neighbor = positive & (neighbor_count > 0)
    cosine = np.zeros(positive.shape, dtype=np.float64)
    np.divide(dot, norms, out=cosine, where=has_neighbor)
    return float(cosine[positive].mean())


def coverage(field: CanvasField, threshold: float) -> float:
    """Fraction of cells whose summed-channel intensity exceeds ``threshold``."""
    if not (math.isfinite(threshold) and threshold >= 0):
        raise ParameterError(f"coverage threshold must be >= 0, got {threshold!r}")
    return float(np.count_nonzero(field.values.sum(axis=2) > threshold) / field.cell_count)


# =============================================================================
# Records and series
# =============================================================================

@dataclass(frozen=True)
class MetricsRecord:
    """Order statistics of one tick. ``local_similarity`` is NaN on a blank field."""

    tick: int
    spatial_entropy: Tuple[float, ...]
    local_similarity: float
    coverage: float
    total_mass: Tuple[float, ...]
    deposit_events: Tuple[int, ...]


def _as_view(world: Union[WorldState, WorldView]) -> WorldView:
    return world.view() if isinstance(world, WorldState) else world


def metrics_record(
    world: Union[WorldState, WorldView],
    coverage_threshold: Optional[float] = None,
    layer: str = "field",
) -> MetricsRecord:
    """
    Measure a world without changing it.

    Args:
        world: A WorldState or the WorldView an observer receives
        coverage_threshold: Defaults to params.metrics.coverage_threshold
        layer: "field" for the live decaying field, "ink" for the permanent layer
    """
    view = _as_view(world)
    if coverage_threshold is None:
        coverage_threshold = view.params.metrics.coverage_threshold

    if layer == "field":
        target = view.field
    elif layer == "ink":
        if view.ink is None:
            raise ParameterError("this world keeps no permanent ink layer (render.permanent = false)")
        target = CanvasField.from_array(view.ink, boundary=view.field.boundary)
    else:
        raise ParameterError(f"layer must be 'field' or 'ink', got {layer!r}")

    channels = range(target.channels)
    try:
        similarity = local_similarity(target)
    except UndefinedMetricError:
        similarity = math.nan

    return MetricsRecord(
        tick=view.tick,
        spatial_entropy=tuple(spatial_entropy(target, c) for c in channels),
        local_similarity=similarity,
        coverage=coverage(target, coverage_threshold),
        total_mass=tuple(target.total_mass(c) for c in channels),
        deposit_events=tuple(view.deposit_events),
    )


def _format(value: Union[int, float]) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), f".{SIGNIFICANT_DIGITS}g")


@dataclass
class MetricsSeries:
    """Ordered per-tick records with a tab-separated table form."""

    channels: int
    records: List[MetricsRecord] = field(default_factory=list)

    def append(self, record: MetricsRecord) -> None:
        if len(record.spatial_entropy) != self.channels:
            raise ParameterError(
                f"record has {len(record.spatial_entropy)} channels, series has {self.channels}"
            )
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def final(self) -> Optional[MetricsRecord]:
        return self.records[-1] if self.records else None

    def header(self) -> List[str]:
        c = range(self.channels)
        return (
            ["tick"]
            + [f"entropy_c{k}" for k in c]
            + ["local_similarity", "coverage"]
            + [f"mass_c{k}" for k in c]
            + [f"deposits_c{k}" for k in c]
        )

    @staticmethod
    def row(record: MetricsRecord) -> List[str]:
        return (
            [_format(record.tick)]
            + [_format(h) for h in record.spatial_entropy]
            + [_format(record.local_similarity), _format(record.coverage)]
            + [_format(m) for m in record.total_mass]
            + [_format(n) for n in record.deposit_events]
        )

    def to_table(self, delimiter: str = "\t") -> str:
        lines = [delimiter.join(self.header())]
        lines.extend(delimiter.join(self.row(r)) for r in self.records)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text: str, delimiter: str = "\t") -> "MetricsSeries":
        """Parse a table written by ``to_table`` (values carry 9 significant digits)."""
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ParameterError("metrics table is empty")
        header = lines[0].split(delimiter)
        channels = sum(1 for name in header if name.startswith("entropy_c"))
        series = cls(channels)
        if header != series.header():
            raise ParameterError(f"unexpected metrics header {header}")

        for line in lines[1:]:
            cells = line.split(delimiter)
            if len(cells) != len(header):
                raise ParameterError(f"metrics row has {len(cells)} columns, expected {len(header)}")
            k = channels
            series.append(
                MetricsRecord(
                    tick=int(cells[0]),
                    spatial_entropy=tuple(float(v) for v in cells[1:1 + k]),
                    local_similarity=float(cells[1 + k]),
                    coverage=float(cells[2 + k]),
                    total_mass=tuple(float(v) for v in cells[3 + k:3 + 2 * k]),
                    deposit_events=tuple(int(v) for v in cells[3 + 2 * k:3 + 3 * k]),
                )
            )
        return series


class MetricsRecorder:
    """
    Run observer that samples a MetricsSeries every ``every`` ticks.

    Call ``record`` directly for ticks off the sampling grid (tick 0, the
    final tick); a tick is never recorded twice in a row.
    """

    def __init__(
        self,
        channels: int,
        every: int = 1,
        coverage_threshold: Optional[float] = None,
        layer: str = "field",
    ):
        if every < 1:
            raise ParameterError(f"every must be >= 1, got {every}", key="metrics.every")
        self.every = every
        self.coverage_threshold = coverage_threshold
        self.layer = layer
        self.series = MetricsSeries(channels)

    @classmethod
    def for_params(cls, params, layer: str = "field") -> "MetricsRecorder":
        return cls(
            params.field.channels,
            every=params.metrics.every,
            coverage_threshold=params.metrics.coverage_threshold,
            layer=layer,
        )

    def record(self, world: Union[WorldState, WorldView]) -> MetricsRecord:
        view = _as_view(world)
        last = self.series.final
        if last is not None and last.tick == view.tick:
            return last
        record = metrics_record(view, self.coverage_threshold, self.layer)
        self.series.append(record)
        return record

    def __call__(self, view: WorldView) -> None:
        if view.tick % self.every == 0:
            self.record(view)


def mean_entropy(record: MetricsRecord) -> float:
    """Channel-averaged spatial entropy of one record."""
    return sum(record.spatial_entropy) / len(record.spatial_entropy)


def summarize(series: Sequence[MetricsRecord]) -> dict:
    """Plain-dict summary of the last record, for manifests and logs."""
    if not series:
        return {}
    last = series[-1]
    return {
        "tick": last.tick,
        "spatial_entropy": [float(h) for h in last.spatial_entropy],
        "local_similarity": None if math.isnan(last.local_similarity) else float(last.local_similarity),
        "coverage": float(last.coverage),
        "total_mass": [float(m) for m in last.total_mass],
        "deposit_events": [int(n) for n in last.deposit_events],
    }
