"""
Agents - Stimulus-Response Painters
===================================

The behavioral half of the stigmergic loop. Each agent:

1. Senses the chromatic stimulus around its cell (Moore mean)
2. Lays ink with a Hill-type response-threshold probability
3. Moves to one of its eight neighbors, drawn from stimulus-weighted,
   heading-relative masses

Agents never read each other's state: the canvas is the only channel.

RANDOMNESS:
    agent_step consumes exactly two uniform variates, in order:
    u1 for the deposit decision, u2 for the move. Both are drawn even when
    the outcome is forced, so streams stay aligned across parameter changes.

License: MIT
"""

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import List, NamedTuple, Optional, Protocol, Sequence, Tuple

from .errors import ParameterError
from .habitat import MOORE_OFFSETS, CanvasField, Cell, moore_mean

# Compass order used everywhere movement is enumerated.
DIRECTION_NAMES: Tuple[str, ...] = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")
DIRECTIONS: Tuple[Cell, ...] = MOORE_OFFSETS[1:]

# Turn classes index the inertia table: 0°, ±45°, ±90°, ±135°, 180°.
TURN_ANGLES: Tuple[int, ...] = (0, 45, 90, 135, 180)
DEFAULT_INERTIA: Tuple[float, ...] = (6.0, 3.0, 1.0, 0.3, 0.1)


class VariateStream(Protocol):
    """Anything that yields uniform variates in [0, 1)."""

    def random(self) -> float:
        ...


def turn_class(heading: int, direction: int) -> int:
    """Index into the inertia table for turning from ``heading`` to ``direction``."""
    k = (direction - heading) % 8
    return min(k, 8 - k)


@dataclass(frozen=True)
class BehaviorParams:
    """
    Constants of the stimulus-response behavior shared by the whole swarm.

    Attributes:
        n: Response exponent (>= 1)
        p0: Spontaneous deposit probability in [0, 1]
        q_amount: Ink per deposit event (> 0)
        beta: Stimulus amplification exponent of the movement weight (>= 0)
        delta: Stimulus saturation coefficient of the movement weight (>= 0)
        w_own: Affinity to the agent's own ink channel
        w_other: Affinity to every other channel
        inertia: Weights for turns of 0°, ±45°, ±90°, ±135°, 180°
    """

    n: float = 2.0
    p0: float = 0.001
    q_amount: float = 1.0
    beta: float = 3.5
    delta: float = 0.2
    w_own: float = 1.0
    w_other: float = 0.5
    inertia: Tuple[float, ...] = DEFAULT_INERTIA

    def __post_init__(self):
        def check(key: str, ok: bool, rule: str, value) -> None:
            if not ok:
                raise ParameterError(f"behavior.{key} must be {rule}, got {value!r}", key=f"behavior.{key}")

        check("n", _finite(self.n) and self.n >= 1, ">= 1", self.n)
        check("p0", _finite(self.p0) and 0 <= self.p0 <= 1, "in [0, 1]", self.p0)
        check("q_amount", _finite(self.q_amount) and self.q_amount > 0, "> 0", self.q_amount)
        check("beta", _finite(self.beta) and self.beta >= 0, ">= 0", self.beta)
        check("delta", _finite(self.delta) and self.delta >= 0, ">= 0", self.delta)
        check("w_own", _finite(self.w_own), "finite", self.w_own)
        check("w_other", _finite(self.w_other), "finite", self.w_other)

        inertia = tuple(float(w) for w in self.inertia)
        check("inertia", len(inertia) == len(TURN_ANGLES), f"{len(TURN_ANGLES)} values", self.inertia)
        check("inertia", all(_finite(w) and w >= 0 for w in inertia), "all >= 0", self.inertia)
        check("inertia", sum(inertia) > 0, "of positive sum", self.inertia)
        object.__setattr__(self, "inertia", inertia)

    @cached_property
    def turn_weights(self) -> Tuple[Tuple[float, ...], ...]:
        """``turn_weights[heading][direction]``: the inertia weight of that turn."""
        return tuple(
            tuple(self.inertia[turn_class(heading, direction)] for direction in range(8))
            for heading in range(8)
        )



def _finite(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


@dataclass(frozen=True)
class AgentState:
    """One swarm member. ``heading`` indexes DIRECTIONS."""

    id: int
    pos: Cell
    heading: int
    channel: int
    theta: float
    steps_since_deposit: int = 0

    def __post_init__(self):
        if not 0 <= self.heading < 8:
            raise ParameterError(f"heading must be in [0, 8), got {self.heading}")
        if not (_finite(self.theta) and self.theta > 0):
            raise ParameterError(f"theta must be > 0, got {self.theta!r}", key="behavior.theta")
        if self.channel < 0:
            raise ParameterError(f"channel must be >= 0, got {self.channel}")
        if self.steps_since_deposit < 0:
            raise ParameterError(f"steps_since_deposit must be >= 0, got {self.steps_since_deposit}")

    def is_valid_for(self, field: CanvasField) -> bool:
        return field.in_bounds(self.pos) and self.channel < field.channels


class DepositEvent(NamedTuple):
    """Ink laid by one agent at one cell."""

    pos: Cell
    channel: int
    amount: float


class MoveOption(NamedTuple):
    """One candidate of a movement distribution."""

    direction: int
    cell: Cell
    probability: float


# =============================================================================
# Response functions
# =============================================================================

def _perceive(vector: Sequence[float], own_channel: int, w_own: float, w_other: float) -> float:
    own = 0.0
    other = 0.0
    for c, value in enumerate(vector):
        if c == own_channel:
            own = value
        else:
            other += value
    return max(0.0, w_own * own + w_other * other)


def perceived_stimulus(
    stimulus_vector: Sequence[float],
    own_channel: int,
    w_own: float,
    w_other: float,
) -> float:
    """Collapse a per-channel stimulus into one non-negative scalar."""
    if not 0 <= own_channel < len(stimulus_vector):
        raise ParameterError(
            f"own_channel must be in [0, {len(stimulus_vector)}), got {own_channel}"
        )
    return _perceive([float(v) for v in stimulus_vector], own_channel, w_own, w_other)


def deposit_probability(s: float, theta: float, n: float, p0: float) -> float:
    """Response threshold: p0 + (1 - p0) * s^n / (s^n + theta^n)."""
    if not theta > 0:
        raise ParameterError(f"theta must be > 0, got {theta!r}")
    if not n >= 1:
        raise ParameterError(f"n must be >= 1, got {n!r}")
    if not 0 <= p0 <= 1:
        raise ParameterError(f"p0 must be in [0, 1], got {p0!r}")
    if s <= 0:
        return p0

    # (s/theta)^n keeps the result scale-free in (s, theta).
    try:
        ratio = (s / theta) ** n
    except OverflowError:
        return 1.0
    if math.isinf(ratio):
        return 1.0
    return p0 + (1.0 - p0) * (ratio / (1.0 + ratio))


def movement_weight(sigma: float, beta: float, delta: float) -> float:
    """(1 + sigma / (1 + delta * sigma)) ** beta; never below 1."""
    if sigma < 0 or beta < 0 or delta < 0:
        raise ParameterError(
            f"movement_weight needs sigma, beta, delta >= 0, got {sigma!r}, {beta!r}, {delta!r}"
        )
    return (1.0 + sigma / (1.0 + delta * sigma)) ** beta


# =============================================================================
# Movement
# =============================================================================

def _candidate_masses(
    agent: AgentState,
    cells: Sequence[Optional[Cell]],
    vectors: Sequence[Optional[Sequence[float]]],
    params: BehaviorParams,
) -> List[float]:
    """Unnormalized masses for the 8 compass directions (0 for invalid ones)."""
    inertia = params.turn_weights[agent.heading]
    beta, delta = params.beta, params.delta
    masses = []
    for direction in range(8):
        vector = vectors[direction]
        if vector is None:
            masses.append(0.0)
            continue
        sigma = _perceive(vector, agent.channel, params.w_own, params.w_other)
        weight = (1.0 + sigma / (1.0 + delta * sigma)) ** beta
        masses.append(weight * inertia[direction])
    return masses


def _fallback_uniform(cells: Sequence[Optional[Cell]]) -> List[float]:
    return [0.0 if cell is None else 1.0 for cell in cells]


def _local_view(agent: AgentState, field: CanvasField):
    """Read the agent's Moore neighborhood once: (sense vector, neighbor cells, neighbor vectors)."""
    cells, rows = field.moore_rows(agent.pos)
    # index 0 is the center
    return moore_mean(rows), cells[1:], rows[1:]


def movement_distribution(
    agent: AgentState, field: CanvasField, params: BehaviorParams
) -> List[MoveOption]:
    """
    Probability of moving to each valid Moore neighbor, in compass order.

    The center is excluded: an agent always moves. The list is empty only on
    a 1x1 bounded canvas, where the agent stays put.
    """
    _, cells, vectors = _local_view(agent, field)
    masses = _candidate_masses(agent, cells, vectors, params)
    total = sum(masses)
    if total <= 0:
        masses = _fallback_uniform(cells)
        total = sum(masses)
        if total == 0:
            return []
    return [
        MoveOption(direction, cell, masses[direction] / total)
        for direction, cell in enumerate(cells)
        if cell is not None
    ]


def _sample_direction(masses: Sequence[float], u: float) -> int:
    """Cumulative inversion over compass order; zero-mass entries are never chosen."""
    target = u * sum(masses)
    cumulative = 0.0
    last_positive = -1
    for direction, mass in enumerate(masses):
        if mass <= 0:
            continue
        last_positive = direction
        cumulative += mass
        if cumulative > target:
            return direction
    # u * total rounded up to the full sum
    return last_positive


def agent_step(
    agent: AgentState,
    field: CanvasField,
    params: BehaviorParams,
    rng: VariateStream,
) -> Tuple[AgentState, Optional[DepositEvent]]:
    """
    Decide one deposit and one move for ``agent``. Pure: nothing is mutated.

    Returns:
        (updated agent, deposit event or None). The event is for the cell the
        agent stood on before moving.
    """
    sensed, cells, vectors = _local_view(agent, field)

    s = _perceive(sensed, agent.channel, params.w_own, params.w_other)
    p = deposit_probability(s, agent.theta, params.n, params.p0)
    u1 = rng.random()
    event: Optional[DepositEvent] = None
    if u1 < p:
        event = DepositEvent(agent.pos, agent.channel, params.q_amount)
        steps = 0
    else:
        steps = agent.steps_since_deposit + 1

    masses = _candidate_masses(agent, cells, vectors, params)
    if sum(masses) <= 0:
        masses = _fallback_uniform(cells)
    u2 = rng.random()
    direction = _sample_direction(masses, u2)
    if direction < 0:
        # 1x1 bounded canvas: nowhere to go
        return replace(agent, steps_since_deposit=steps), event

    moved = AgentState(agent.id, cells[direction], direction, agent.channel, agent.theta, steps)
    return moved, event
