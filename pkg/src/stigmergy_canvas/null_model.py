"""
Null Model - Severing the Stigmergic Coupling
=============================================

Emergence is measured as a difference, not an absolute number: the same
swarm is run twice from the same seed.

    coupled  the configured behavior
    null     w_own = w_other = 0, p0 = the coupled run's deposit rate

In the null run ink never influences anyone: deposits happen at a flat
rate and movement is the inertia-only correlated random walk. The rate is
matched to the coupled run's measured events per agent-step, so both runs
lay statistically equal ink. How close the match came is reported.

The paired experiment compares similarity on the permanent ink layer:
coupled agents lay strokes, while the null run leaves isolated dots at
the same rate.

USAGE:
    result = null_model_run(params)
    print(result.coupled.final.local_similarity, result.null.final.local_similarity)

    trial = emergence_trial(params, seeds=range(20))
    print(f"{trial.wins}/{len(trial.outcomes)}")

License: MIT
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

from .engine import WorldState, init_world, run
from .metrics import MetricsRecorder, MetricsSeries, mean_entropy, metrics_record
from .params import RunParams, SimParams

logger = logging.getLogger(__name__)

# Relative gap between target and realized rate worth a warning.
RATE_MISMATCH_WARNING = 0.25


def deposit_rate(world: WorldState) -> Optional[float]:
    """Deposit events per agent-step so far, or None before any agent has stepped."""
    steps = len(world.agents) * world.tick
    if steps == 0:
        return None
    return world.ledger.total_events / steps


def null_params(params: SimParams, rate: float) -> SimParams:
    """``params`` with stigmergic coupling removed and a flat deposit probability ``rate``."""
    behavior = replace(params.behavior, w_own=0.0, w_other=0.0, p0=min(max(rate, 0.0), 1.0))
    return replace(params, behavior=behavior)


def recorded_run(params: SimParams, layer: str = "field") -> Tuple[WorldState, MetricsSeries]:
    """Simulate ``params`` sampling metrics at tick 0, every metrics.every ticks, and the final tick."""
    world = init_world(params)
    recorder = MetricsRecorder.for_params(params, layer=layer)
    recorder.record(world)
    run(world, params.run.ticks, recorder)
    recorder.record(world)
    return world, recorder.series


@dataclass
class NullModelResult:
    """A coupled run and its rate-matched null counterpart."""

    coupled: MetricsSeries
    null: MetricsSeries
    target_rate: float
    null_rate: Optional[float]
    coupled_world: WorldState
    null_world: WorldState

    @property
    def rate_gap(self) -> Optional[float]:
        """Relative difference between realized and target rate (None when undefined)."""
        if self.null_rate is None or self.target_rate == 0:
            return None
        return abs(self.null_rate - self.target_rate) / self.target_rate

    def ink_similarity(self) -> Optional[Tuple[float, float]]:
        """Final local_similarity of the (coupled, null) permanent ink layers; None without them."""
        if self.coupled_world.ledger.ink is None:
            return None
        return (
            metrics_record(self.coupled_world, layer="ink").local_similarity,
            metrics_record(self.null_world, layer="ink").local_similarity,
        )



def null_model_run(params: SimParams, layer: str = "field") -> NullModelResult:
    """
    Run ``params`` coupled, then uncoupled at the matched deposit rate.

    Both runs share the seed, so initial positions, headings and channels
    are identical.
    """
    coupled_world, coupled_series = recorded_run(params, layer)
    measured = deposit_rate(coupled_world)
    target = params.behavior.p0 if measured is None else measured

    null_world, null_series = recorded_run(null_params(params, target), layer)
    realized = deposit_rate(null_world)

    result = NullModelResult(
        coupled=coupled_series,
        null=null_series,
        target_rate=target,
        null_rate=realized,
        coupled_world=coupled_world,
        null_world=null_world,
    )
    logger.info(
        f"Null model seed={params.run.seed}: target rate {target:.6g}, "
        f"realized {'n/a' if realized is None else format(realized, '.6g')}"
    )
    gap = result.rate_gap
    if gap is not None and gap > RATE_MISMATCH_WARNING:
        logger.warning(
            f"Null run deposit rate {realized:.6g} is {gap:.0%} away from target {target:.6g}"
        )
    return result


# =============================================================================
# Paired experiment
# =============================================================================

@dataclass(frozen=True)
class SeedOutcome:
    """Final-tick comparison for one seed."""

    seed: int
    coupled_similarity: float
    null_similarity: float
    coupled_entropy: float
    null_entropy: float
    target_rate: float
    null_rate: Optional[float]

    @property
    def coupled_wins(self) -> bool:
        """Coupled similarity strictly above null; a NaN on either side never wins."""
        return self.coupled_similarity > self.null_similarity


@dataclass
class EmergenceTrial:
    outcomes: List[SeedOutcome]

    @property
    def wins(self) -> int:
        return sum(1 for o in self.outcomes if o.coupled_wins)

    @property
    def mean_coupled_entropy(self) -> float:
        return _mean([o.coupled_entropy for o in self.outcomes])

    @property
    def mean_null_entropy(self) -> float:
        return _mean([o.null_entropy for o in self.outcomes])


def _mean(values: List[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def emergence_trial(params: SimParams, seeds: Iterable[int]) -> EmergenceTrial:
    """
    Coupled-vs-null comparison over ``seeds`` (each seed replaces run.seed).

    Similarity is read from the permanent ink layer, where a stroke and a
    scatter of isolated dots differ most; entropy is read from the decaying
    field. The ink layer is switched on for the trial if the params lack it.
    """
    params = replace(params, render=replace(params.render, permanent=True))
    outcomes = []
    for seed in seeds:
        seeded = replace(params, run=RunParams(seed=seed, ticks=params.run.ticks))
        result = null_model_run(seeded)
        coupled, null = result.coupled.final, result.null.final
        outcomes.append(
            SeedOutcome(
                seed=seed,
                coupled_similarity=metrics_record(result.coupled_world, layer="ink").local_similarity,
                null_similarity=metrics_record(result.null_world, layer="ink").local_similarity,
                coupled_entropy=mean_entropy(coupled),
                null_entropy=mean_entropy(null),
                target_rate=result.target_rate,
                null_rate=result.null_rate,
            )
        )
    trial = EmergenceTrial(outcomes)
    logger.info(f"Emergence trial: coupled similarity higher in {trial.wins}/{len(outcomes)} seeds")
    return trial
