"""
Configuration Documents
=======================

Line-based ``key = value`` documents describing a SimParams.

EXAMPLE FILE:
```
# 64x64 two-color study
field.width = 64
field.height = 64
field.channels = 2
agents.count = 32
dynamics.rho = 0.015      # evaporation per tick
run.seed = 7
palette.channel1 = 0, 128, 255
```

RULES:
- one pair per line; ``#`` starts a comment; blank lines are ignored
- keys are dot-namespaced; unknown or repeated keys are errors
- missing keys take their defaults
- list values are comma-separated

serialize_config writes every key, so parse(serialize(p)) == p.

License: MIT
"""

import logging
import re
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

from .agents import BehaviorParams
from .errors import ConfigError, ParameterError
from .habitat import Boundary
from .params import (
    AgentsParams,
    DynamicsParams,
    FieldParams,
    MetricsParams,
    RenderParams,
    RunParams,
    SimParams,
)

logger = logging.getLogger(__name__)


# =============================================================================
# Value codecs
# =============================================================================

def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _split(text: str) -> List[str]:
    items = [item.strip() for item in text.split(",")]
    if any(not item for item in items):
        raise ValueError(f"empty item in list {text!r}")
    return items


def _parse_float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in _split(text))


def _parse_int_list(text: str) -> Tuple[int, ...]:
    return tuple(int(item, 10) for item in _split(text))


def _parse_rgb(text: str) -> Tuple[int, int, int]:
    values = _parse_int_list(text)
    if len(values) != 3:
        raise ValueError(f"expected 'r, g, b', got {text!r}")
    return values  # type: ignore[return-value]


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Boundary):
        return value.value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    return str(value)


class _Key(NamedTuple):
    section: str
    attribute: str
    parse: Callable[[str], Any]


# Order here is the order serialize_config writes.
KEYS: Dict[str, _Key] = {
    "field.width": _Key("field", "width", _parse_int),
    "field.height": _Key("field", "height", _parse_int),
    "field.channels": _Key("field", "channels", _parse_int),
    "field.boundary": _Key("field", "boundary", str),
    "agents.count": _Key("agents", "count", _parse_int),
    "agents.max_count": _Key("agents", "max_count", _parse_int),
    "agents.allocation": _Key("agents", "allocation", _parse_int_list),
    "behavior.theta": _Key("agents", "theta", _parse_float_list),
    "behavior.n": _Key("behavior", "n", _parse_float),
    "behavior.p0": _Key("behavior", "p0", _parse_float),
    "behavior.q_amount": _Key("behavior", "q_amount", _parse_float),
    "behavior.beta": _Key("behavior", "beta", _parse_float),
    "behavior.delta": _Key("behavior", "delta", _parse_float),
    "behavior.w_own": _Key("behavior", "w_own", _parse_float),
    "behavior.w_other": _Key("behavior", "w_other", _parse_float),
    "behavior.inertia": _Key("behavior", "inertia", _parse_float_list),
    "dynamics.rho": _Key("dynamics", "rho", _parse_float),
    "dynamics.lambda": _Key("dynamics", "lam", _parse_float),
    "dynamics.sigma_max": _Key("dynamics", "sigma_max", _parse_float),
    "dynamics.epsilon_floor": _Key("dynamics", "epsilon_floor", _parse_float),
    "run.seed": _Key("run", "seed", _parse_int),
    "run.ticks": _Key("run", "ticks", _parse_int),
    "metrics.every": _Key("metrics", "every", _parse_int),
    "metrics.coverage_threshold": _Key("metrics", "coverage_threshold", _parse_float),
    "render.permanent": _Key("render", "permanent", _parse_bool),
    "palette.exposure": _Key("render", "exposure", _parse_float),
    "palette.background": _Key("render", "background", _parse_rgb),
}

PALETTE_CHANNEL_KEY = re.compile(r"^palette\.channel(\d+)$")

_SECTIONS = {
    "field": FieldParams,
    "agents": AgentsParams,
    "behavior": BehaviorParams,
    "dynamics": DynamicsParams,
    "run": RunParams,
    "metrics": MetricsParams,
    "render": RenderParams,
}


# =============================================================================
# Parsing
# =============================================================================

def _strip_comment(line: str) -> str:
    index = line.find("#")
    return line if index < 0 else line[:index]


def parse_config(text: str) -> SimParams:
    """
    Parse a configuration document into validated SimParams.

    Raises:
        ConfigError: naming the line number and key of the first problem
    """
    sections: Dict[str, Dict[str, Any]] = {name: {} for name in _SECTIONS}
    channel_colors: Dict[int, Tuple[int, int, int]] = {}
    lines: Dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno)

        key, _, value = (part.strip() for part in line.partition("="))
        if not key:
            raise ConfigError("missing key before '='", line=lineno)
        if not value:
            raise ConfigError("missing value after '='", line=lineno, key=key)
        palette_match = PALETTE_CHANNEL_KEY.match(key)
        if palette_match:
            key = f"palette.channel{int(palette_match.group(1))}"
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", line=lineno, key=key)

        if palette_match:
            try:
                channel_colors[int(palette_match.group(1))] = _parse_rgb(value)
            except ValueError as e:
                raise ConfigError(str(e), line=lineno, key=key) from None
            lines[key] = lineno
            continue

        entry = KEYS.get(key)
        if entry is None:
            raise ConfigError("unknown key", line=lineno, key=key)
        try:
            sections[entry.section][entry.attribute] = entry.parse(value)
        except ValueError as e:
            raise ConfigError(f"invalid value {value!r}: {e}", line=lineno, key=key) from None
        lines[key] = lineno

    sections["render"]["channel_colors"] = tuple(sorted(channel_colors.items()))

    try:
        records = {name: cls(**sections[name]) for name, cls in _SECTIONS.items()}
        params = SimParams(**records)
    except ParameterError as e:
        raise ConfigError(str(e), line=lines.get(e.key or ""), key=e.key) from None

    logger.debug(f"Parsed configuration: {len(lines)} keys set, others default")
    return params


# =============================================================================
# Serialization
# =============================================================================

def serialize_config(params: SimParams, header: Optional[str] = "stigmergy-canvas configuration") -> str:
    """Write ``params`` as a configuration document covering every key."""
    out = []
    if header:
        out.append(f"# {header}")
    for key, entry in KEYS.items():
        value = getattr(getattr(params, entry.section), entry.attribute)
        if value is None:
            continue
        out.append(f"{key} = {_format_value(value)}")
    for channel, color in params.render.channel_colors:
        out.append(f"palette.channel{channel} = {_format_value(color)}")
    return "\n".join(out) + "\n"
