"""
Render - Paintings as PPM Images
================================

Turns a field (or the permanent ink layer) into a binary PPM (P6) image.

PIXEL RULE:
    color = background + sum_c tone(v_c) * base_color_c
    tone(v) = 1 - exp(-exposure * v)

Channels are added in index order, clamped to 255, then rounded half up.
The same field and palette always give the same bytes.

License: MIT
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from .engine import WorldState, WorldView
from .errors import ParameterError
from .habitat import CanvasField
from .params import RGB, SimParams

logger = logging.getLogger(__name__)

# red, green, blue, yellow, magenta, cyan, white; repeated for more channels
DEFAULT_PRIMARIES: Tuple[RGB, ...] = (
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 255, 0),
    (255, 0, 255),
    (0, 255, 255),
    (255, 255, 255),
)

_PPM_HEADER = re.compile(rb"\AP6\s+(\d+)\s+(\d+)\s+(\d+)\s")


@dataclass(frozen=True)
class Palette:
    """One base color per channel, a background and the tone-map exposure."""

    colors: Tuple[RGB, ...]
    background: RGB = (0, 0, 0)
    exposure: float = 0.6

    def __post_init__(self):
        if not self.colors:
            raise ParameterError("palette needs at least one channel color")
        for color in (*self.colors, self.background):
            if len(color) != 3 or not all(0 <= int(v) <= 255 for v in color):
                raise ParameterError(f"palette colors must be RGB triples in [0, 255], got {color!r}")
        if not self.exposure > 0:
            raise ParameterError(f"exposure must be > 0, got {self.exposure!r}", key="palette.exposure")

    @property
    def channels(self) -> int:
        return len(self.colors)


def default_palette(channels: int, exposure: float = 0.6) -> Palette:
    return Palette(
        colors=tuple(DEFAULT_PRIMARIES[c % len(DEFAULT_PRIMARIES)] for c in range(channels)),
        exposure=exposure,
    )


def palette_from_params(params: SimParams) -> Palette:
    """Palette for ``params``: primaries, overridden by any palette.channelK entries."""
    colors = list(default_palette(params.field.channels).colors)
    for channel, color in params.render.channel_colors:
        colors[channel] = color
    logger.debug(f"Palette resolved: {colors} on {params.render.background}")
    return Palette(
        colors=tuple(colors),
        background=params.render.background,
        exposure=params.render.exposure,
    )


# =============================================================================
# Rendering
# =============================================================================

def render_pixels(values: np.ndarray, palette: Palette) -> np.ndarray:
    """(H, W, C) intensities to an (H, W, 3) uint8 image."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 3:
        raise ParameterError(f"values must be shaped (height, width, channels), got {values.shape}")
    if values.shape[2] != palette.channels:
        raise ParameterError(
            f"palette has {palette.channels} colors but the field has {values.shape[2]} channels"
        )

    height, width, channels = values.shape
    rgb = np.empty((height, width, 3), dtype=np.float64)
    rgb[...] = np.asarray(palette.background, dtype=np.float64)
    for c in range(channels):
        tone = 1.0 - np.exp(-palette.exposure * values[:, :, c])
        rgb += tone[:, :, None] * np.asarray(palette.colors[c], dtype=np.float64)

    np.minimum(rgb, 255.0, out=rgb)
    return np.floor(rgb + 0.5).astype(np.uint8)


def render_image(field: Union[CanvasField, np.ndarray], palette: Palette) -> bytes:
    """Binary PPM bytes of ``field``; the field is only read."""
    values = field.values if isinstance(field, CanvasField) else field
    pixels = render_pixels(values, palette)
    height, width = pixels.shape[:2]
    return f"P6\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def render_world(world: Union[WorldState, WorldView], palette: Optional[Palette] = None) -> bytes:
    """Render the permanent ink layer when the world keeps one, else the live field."""
    if isinstance(world, WorldState):
        world = world.view()
    if palette is None:
        palette = palette_from_params(world.params)
    if world.params.render.permanent and world.ink is not None:
        return render_image(world.ink, palette)
    return render_image(world.field, palette)


def write_ppm(data: bytes, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    logger.info(f"Wrote image {path} ({len(data)} bytes)")
    return path


def read_ppm(data: bytes) -> np.ndarray:
    """
    Strict P6 reader: maxval 255, no comments, exact payload length.

    Returns:
        (height, width, 3) uint8 array
    """
    match = _PPM_HEADER.match(data)
    if not match:
        raise ParameterError("not a binary PPM (P6) image")
    width, height, maxval = (int(g) for g in match.groups())
    if width < 1 or height < 1:
        raise ParameterError(f"PPM dimensions must be positive, got {width}x{height}")
    if maxval != 255:
        raise ParameterError(f"PPM maxval must be 255, got {maxval}")
    payload = data[match.end():]
    if len(payload) != 3 * width * height:
        raise ParameterError(
            f"PPM payload is {len(payload)} bytes, expected {3 * width * height}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()
