"""
Engine - Deterministic Simulation Loop
======================================

Owns the WorldState (canvas + swarm + tick + random stream) and the tick
contract:

    phase A  agents act in ascending id order; each deposit lands at once,
             so later agents sense earlier agents' fresh ink
    phase B  evaporate(rho)
    phase C  diffuse(lambda)
    tick += 1

RANDOM STREAM:
    One counter-based Philox stream per world, consumed in a published order:
    3 variates per agent at initialization (x, y, heading, in id order), then
    exactly 2 per agent per tick. Nothing else draws from it.

USAGE:
    world = init_world(params)
    run(world, 1000, hook=lambda view: print(view.tick))

License: MIT
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .agents import AgentState, DepositEvent, agent_step
from .errors import ObserverError, ParameterError, ResourceError
from .habitat import CanvasField, new_field, read_only_view
from .params import SimParams

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    """The world's counter-based generator for ``seed``."""
    return np.random.Generator(np.random.Philox(seed))


def allocate_channels(count: int, channels: int, allocation: Optional[Sequence[int]] = None) -> List[int]:
    """
    Ink channel for each agent id.

    Plain round-robin by id; with an ``allocation`` the round-robin skips
    channels whose quota is used up.
    """
    if allocation is None:
        return [i % channels for i in range(count)]

    quotas = list(allocation)
    if len(quotas) != channels or sum(quotas) != count:
        raise ParameterError(
            f"allocation {tuple(allocation)} does not split {count} agents over {channels} channels",
            key="agents.allocation",
        )
    assigned = []
    c = 0
    for _ in range(count):
        while quotas[c] == 0:
            c = (c + 1) % channels
        assigned.append(c)
        quotas[c] -= 1
        c = (c + 1) % channels
    return assigned


class InkLedger:
    """
    Bookkeeping of every deposit event.

    Attributes:
        deposit_events: Events per channel
        deposited_mass: Ink actually added per channel (after clamping)
        ink: Permanent accumulator shaped like the field, or None when the
             world does not keep one. Never evaporated, diffused or clamped.
    """

    def __init__(self, channels: int, shape: Optional[Tuple[int, int, int]] = None):
        self.deposit_events = [0] * channels
        self.deposited_mass = [0.0] * channels
        self.ink: Optional[np.ndarray] = None if shape is None else np.zeros(shape, dtype=np.float64)

    def record(self, event: DepositEvent, added: float) -> None:
        x, y = event.pos
        self.deposit_events[event.channel] += 1
        self.deposited_mass[event.channel] += added
        if self.ink is not None:
            self.ink[y, x, event.channel] += event.amount

    def copy(self) -> "InkLedger":
        clone = InkLedger(len(self.deposit_events))
        clone.deposit_events = list(self.deposit_events)
        clone.deposited_mass = list(self.deposited_mass)
        clone.ink = None if self.ink is None else self.ink.copy()
        return clone

    @property
    def total_events(self) -> int:
        return sum(self.deposit_events)


@dataclass(frozen=True)
class WorldView:
    """Read-only look at a world, handed to run observers."""

    tick: int
    field: CanvasField
    ink: Optional[np.ndarray]
    agents: Tuple[AgentState, ...]
    params: SimParams
    deposit_events: Tuple[int, ...]
    deposited_mass: Tuple[float, ...]


@dataclass
class WorldState:
    """The habitat plus its inhabitants; the unit of snapshot/restore."""

    field: CanvasField
    agents: List[AgentState]
    params: SimParams
    tick: int
    rng: np.random.Generator
    ledger: InkLedger

    @property
    def rng_state(self) -> Dict[str, Any]:
        return self.rng.bit_generator.state

    def view(self) -> WorldView:
        ink = None
        if self.ledger.ink is not None:
            ink = read_only_view(self.ledger.ink)
        return WorldView(
            tick=self.tick,
            field=self.field.frozen(),
            ink=ink,
            agents=tuple(self.agents),
            params=self.params,
            deposit_events=tuple(self.ledger.deposit_events),
            deposited_mass=tuple(self.ledger.deposited_mass),
        )

    def clone(self) -> "WorldState":
        """Independent deep copy, random stream included."""
        rng = np.random.Generator(np.random.Philox())
        rng.bit_generator.state = self.rng.bit_generator.state
        return WorldState(
            field=self.field.copy(),
            agents=list(self.agents),
            params=self.params,
            tick=self.tick,
            rng=rng,
            ledger=self.ledger.copy(),
        )


# =============================================================================
# Lifecycle
# =============================================================================

def init_world(params: SimParams) -> WorldState:
    """
    Blank canvas plus a uniformly scattered swarm.

    Raises:
        ResourceError: if agents.count exceeds agents.max_count
    """
    count = params.agents.count
    if count > params.agents.max_count:
        raise ResourceError(
            f"agents.count {count} exceeds the cap agents.max_count={params.agents.max_count}"
        )

    fp = params.field
    dyn = params.dynamics
    field = new_field(fp.width, fp.height, fp.channels, fp.boundary, dyn.sigma_max, dyn.epsilon_floor)
    rng = make_rng(params.run.seed)
    channels = allocate_channels(count, fp.channels, params.agents.allocation)

    agents: List[AgentState] = []
    if count:
        variates = rng.random(3 * count)
        for i in range(count):
            u_x, u_y, u_h = variates[3 * i:3 * i + 3]
            channel = channels[i]
            agents.append(
                AgentState(
                    id=i,
                    pos=(min(int(u_x * fp.width), fp.width - 1), min(int(u_y * fp.height), fp.height - 1)),
                    heading=min(int(u_h * 8), 7),
                    channel=channel,
                    # snapshots carry theta as f32
                    theta=float(np.float32(params.theta_for(channel))),
                )
            )

    shape = (fp.height, fp.width, fp.channels) if params.render.permanent else None
    world = WorldState(
        field=field,
        agents=agents,
        params=params,
        tick=0,
        rng=rng,
        ledger=InkLedger(fp.channels, shape),
    )
    logger.info(
        f"World initialized: {fp.width}x{fp.height}x{fp.channels} {fp.boundary.value}, "
        f"{count} agents, seed={params.run.seed}"
    )
    return world


def step(world: WorldState) -> WorldState:
    """Advance one tick in place and return the same world."""
    field = world.field
    behavior = world.params.behavior
    dynamics = world.params.dynamics
    agents = world.agents
    rng = world.rng
    ledger = world.ledger

    # Phase A: id order, deposits applied immediately
    for i, agent in enumerate(agents):
        moved, event = agent_step(agent, field, behavior, rng)
        if event is not None:
            added = field.deposit(event.pos, event.channel, event.amount)
            ledger.record(event, added)
        agents[i] = moved

    # Phase B, C
    field.evaporate(dynamics.rho)
    field.diffuse(dynamics.lam)

    world.tick += 1
    return world


Observer = Callable[[WorldView], None]


def run(world: WorldState, ticks: int, hook: Optional[Observer] = None) -> WorldState:
    """
    Apply ``step`` exactly ``ticks`` times, calling ``hook`` after each one.

    Raises:
        ObserverError: if the hook raises; the world is left at that tick
    """
    if isinstance(ticks, bool) or not isinstance(ticks, int) or ticks < 0:
        raise ParameterError(f"ticks must be an integer >= 0, got {ticks!r}", key="run.ticks")

    start = world.tick
    for _ in range(ticks):
        step(world)
        if hook is not None:
            try:
                hook(world.view())
            except Exception as e:
                logger.error(f"Observer failed at tick {world.tick}: {e}")
                raise ObserverError(world.tick, e) from e

    if ticks:
        logger.info(
            f"Ran ticks {start}..{world.tick}: "
            f"{world.ledger.total_events} deposit events, mass={world.field.masses()}"
        )
    return world


def simulate(params: SimParams, hook: Optional[Observer] = None) -> WorldState:
    """init_world followed by run for ``params.run.ticks`` ticks."""
    world = init_world(params)
    return run(world, params.run.ticks, hook)
