"""
Simulation Parameters
=====================

SimParams gathers every global model constant. It is grouped the same way
configuration keys are namespaced (field.*, agents.*, behavior.*,
dynamics.*, run.*, metrics.*, render.* / palette.*), and every record
validates itself on construction, so a SimParams that exists is valid.

License: MIT
"""

import math
from dataclasses import dataclass
from dataclasses import field as _field
from typing import Optional, Tuple

from .agents import BehaviorParams
from .errors import ParameterError
from .habitat import (
    DEFAULT_EPSILON_FLOOR,
    DEFAULT_SIGMA_MAX,
    MAX_CHANNELS,
    MAX_DIMENSION,
    MAX_VALUES,
    Boundary,
)

RGB = Tuple[int, int, int]

MAX_SEED = (1 << 64) - 1
DEFAULT_AGENT_CAP = 1_000_000
DEFAULT_THETA = 0.25


def _require(ok: bool, key: str, rule: str, value) -> None:
    if not ok:
        raise ParameterError(f"{key} must be {rule}, got {value!r}", key=key)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_finite(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _check_rgb(key: str, color) -> RGB:
    _require(
        isinstance(color, tuple) and len(color) == 3 and all(_is_int(v) and 0 <= v <= 255 for v in color),
        key,
        "an RGB triple of integers in [0, 255]",
        color,
    )
    return color


@dataclass(frozen=True)
class FieldParams:
    width: int = 512
    height: int = 512
    channels: int = 3
    boundary: Boundary = Boundary.BOUNDED

    def __post_init__(self):
        _require(_is_int(self.width) and 1 <= self.width <= MAX_DIMENSION, "field.width", f"in [1, {MAX_DIMENSION}]", self.width)
        _require(_is_int(self.height) and 1 <= self.height <= MAX_DIMENSION, "field.height", f"in [1, {MAX_DIMENSION}]", self.height)
        _require(_is_int(self.channels) and 1 <= self.channels <= MAX_CHANNELS, "field.channels", f"in [1, {MAX_CHANNELS}]", self.channels)
        _require(
            self.width * self.height * self.channels <= MAX_VALUES,
            "field.width",
            f"such that width*height*channels <= {MAX_VALUES}",
            (self.width, self.height, self.channels),
        )
        try:
            object.__setattr__(self, "boundary", Boundary.parse(self.boundary))
        except ParameterError as e:
            raise ParameterError(str(e), key="field.boundary") from None


@dataclass(frozen=True)
class AgentsParams:
    """
    Swarm size and composition.

    ``allocation`` optionally fixes how many agents paint each channel;
    ``theta`` holds one threshold for everyone or one per channel. The
    default is on the scale of the Moore mean of one fresh unit deposit
    (about 0.1): ink an agent has just laid lifts its deposit probability
    far above p0, while bare canvas stays at the spontaneous rate.
    """

    count: int = 200
    max_count: int = DEFAULT_AGENT_CAP
    allocation: Optional[Tuple[int, ...]] = None
    theta: Tuple[float, ...] = (DEFAULT_THETA,)

    def __post_init__(self):
        _require(_is_int(self.count) and self.count >= 0, "agents.count", ">= 0", self.count)
        _require(_is_int(self.max_count) and self.max_count >= 0, "agents.max_count", ">= 0", self.max_count)
        if self.allocation is not None:
            _require(
                all(_is_int(n) and n >= 0 for n in self.allocation),
                "agents.allocation",
                "a list of non-negative integers",
                self.allocation,
            )
            _require(
                sum(self.allocation) == self.count,
                "agents.allocation",
                f"a list summing to agents.count ({self.count})",
                self.allocation,
            )
        _require(
            len(self.theta) >= 1 and all(_is_finite(t) and t > 0 for t in self.theta),
            "behavior.theta",
            "one or more values > 0",
            self.theta,
        )


@dataclass(frozen=True)
class DynamicsParams:
    rho: float = 0.015
    lam: float = 0.1
    sigma_max: float = DEFAULT_SIGMA_MAX
    epsilon_floor: float = DEFAULT_EPSILON_FLOOR

    def __post_init__(self):
        _require(_is_finite(self.rho) and 0 <= self.rho <= 1, "dynamics.rho", "in [0, 1]", self.rho)
        _require(_is_finite(self.lam) and 0 <= self.lam <= 1, "dynamics.lambda", "in [0, 1]", self.lam)
        _require(_is_finite(self.sigma_max) and self.sigma_max > 0, "dynamics.sigma_max", "> 0", self.sigma_max)
        _require(
            _is_finite(self.epsilon_floor) and self.epsilon_floor >= 0,
            "dynamics.epsilon_floor",
            ">= 0",
            self.epsilon_floor,
        )


@dataclass(frozen=True)
class RunParams:
    seed: int = 0
    ticks: int = 2000

    def __post_init__(self):
        _require(_is_int(self.seed) and 0 <= self.seed <= MAX_SEED, "run.seed", f"in [0, {MAX_SEED}]", self.seed)
        _require(_is_int(self.ticks) and self.ticks >= 0, "run.ticks", ">= 0", self.ticks)


@dataclass(frozen=True)
class MetricsParams:
    every: int = 10
    coverage_threshold: float = 0.05

    def __post_init__(self):
        _require(_is_int(self.every) and self.every >= 1, "metrics.every", ">= 1", self.every)
        _require(
            _is_finite(self.coverage_threshold) and self.coverage_threshold >= 0,
            "metrics.coverage_threshold",
            ">= 0",
            self.coverage_threshold,
        )


@dataclass(frozen=True)
class RenderParams:
    """
    Rendering settings.

    ``channel_colors`` holds explicit (channel, RGB) overrides sorted by
    channel; channels without an override use the default primaries.
    """

    permanent: bool = True
    exposure: float = 0.6
    background: RGB = (0, 0, 0)
    channel_colors: Tuple[Tuple[int, RGB], ...] = ()

    def __post_init__(self):
        _require(isinstance(self.permanent, bool), "render.permanent", "true or false", self.permanent)
        _require(_is_finite(self.exposure) and self.exposure > 0, "palette.exposure", "> 0", self.exposure)
        _check_rgb("palette.background", self.background)
        for channel, color in self.channel_colors:
            _require(_is_int(channel) and channel >= 0, f"palette.channel{channel}", "a channel index >= 0", channel)
            _check_rgb(f"palette.channel{channel}", color)
        object.__setattr__(self, "channel_colors", tuple(sorted(self.channel_colors)))


@dataclass(frozen=True)
class SimParams:
    """All global model constants; the unit a configuration document describes."""

    field: FieldParams = _field(default_factory=FieldParams)
    agents: AgentsParams = _field(default_factory=AgentsParams)
    behavior: BehaviorParams = _field(default_factory=BehaviorParams)
    dynamics: DynamicsParams = _field(default_factory=DynamicsParams)
    run: RunParams = _field(default_factory=RunParams)
    metrics: MetricsParams = _field(default_factory=MetricsParams)
    render: RenderParams = _field(default_factory=RenderParams)

    def __post_init__(self):
        channels = self.field.channels
        if self.agents.allocation is not None:
            _require(
                len(self.agents.allocation) == channels,
                "agents.allocation",
                f"a list of {channels} counts (one per channel)",
                self.agents.allocation,
            )
        _require(
            len(self.agents.theta) in (1, channels),
            "behavior.theta",
            f"a single value or {channels} values",
            self.agents.theta,
        )
        for channel, _ in self.render.channel_colors:
            _require(channel < channels, f"palette.channel{channel}", f"a channel index < {channels}", channel)

    def theta_for(self, channel: int) -> float:
        theta = self.agents.theta
        return theta[0] if len(theta) == 1 else theta[channel]
