"""
Habitat - The Canvas Field
==========================

The canvas is the swarm's shared medium and its collective memory: a
W x H x C grid of non-negative chromatic intensities. Agents sense it and
lay ink into it; between ticks it evaporates and diffuses.

LAYOUT:
    values[y, x, c]  (row 0 is the top row of the rendered image)

NEIGHBORHOODS:
    - Moore (8 + center) for sensing
    - von Neumann (4) for diffusion

BOUNDARIES:
    - Bounded: off-canvas positions are invalid; diffusion shares aimed
      off-canvas stay in the source cell (reflecting, mass-conserving)
    - Toroidal: every position wraps

License: MIT
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BoundsError, FieldError, ParameterError

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

# Fixed enumeration order: center, then compass order N, NE, E, SE, S, SW, W, NW.
# y grows downward, so north is dy = -1.
MOORE_OFFSETS: Tuple[Cell, ...] = (
    (0, 0),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
)

VON_NEUMANN_OFFSETS: Tuple[Cell, ...] = ((0, -1), (1, 0), (0, 1), (-1, 0))

DEFAULT_SIGMA_MAX = 10.0
DEFAULT_EPSILON_FLOOR = 1e-6

MAX_DIMENSION = 65535
MAX_CHANNELS = 255
MAX_VALUES = 1 << 30


def read_only_view(array: np.ndarray) -> np.ndarray:
    """
    A view of ``array`` that sees its later writes but cannot be made writable.

    The view is built over a read-only buffer, so numpy refuses to set
    ``flags.writeable = True`` on it.
    """
    return np.asarray(memoryview(array).toreadonly())


class Boundary(str, Enum):
    """Edge behavior of the canvas."""

    BOUNDED = "bounded"
    TOROIDAL = "toroidal"

    @classmethod
    def parse(cls, value: Union[str, "Boundary"]) -> "Boundary":
        if isinstance(value, Boundary):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ParameterError(
                f"boundary must be one of {[b.value for b in cls]}, got {value!r}"
            ) from None


@dataclass(frozen=True)
class Neighborhood:
    """
    The Moore neighborhood of a cell.

    ``cells[i]`` is the (wrapped) coordinate for ``offsets[i]`` or None when
    that offset falls off a bounded canvas.
    """

    center: Cell
    offsets: Tuple[Cell, ...]
    valid: Tuple[bool, ...]
    cells: Tuple[Optional[Cell], ...]

    @property
    def valid_count(self) -> int:
        return sum(self.valid)

    def valid_cells(self) -> List[Cell]:
        return [cell for cell in self.cells if cell is not None]


def _check_dimension(name: str, value: int, limit: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ParameterError(f"{name} must be >= 1, got {value}")
    if value > limit:
        raise ParameterError(f"{name} must be <= {limit}, got {value}")
    return int(value)


def moore_mean(rows: Sequence[Optional[Sequence[float]]]) -> List[float]:
    """Per-channel mean of the valid rows, summed in neighborhood order."""
    valid = [row for row in rows if row is not None]
    return [sum(column) / len(valid) for column in zip(*valid)]


def _spans(d: int, size: int, toroidal: bool) -> List[Tuple[slice, slice]]:
    """(target, source) slice pairs along one axis for a shift of d in {-1, 0, 1}."""
    if d == 0:
        return [(slice(None), slice(None))]
    if d > 0:
        spans = [(slice(0, size - 1), slice(1, size))]
        wrap = (slice(size - 1, size), slice(0, 1))
    else:
        spans = [(slice(1, size), slice(0, size - 1))]
        wrap = (slice(0, 1), slice(size - 1, size))
    if toroidal:
        spans.append(wrap)
    return spans


def add_shifted(out: np.ndarray, array: np.ndarray, dx: int, dy: int, boundary: Boundary) -> None:
    """
    Align each cell with its (dx, dy) neighbor: ``out[y, x] += array[y + dy, x + dx]``.

    Off-canvas neighbors add nothing under Bounded and wrap under Toroidal.
    Offsets are limited to -1, 0 and 1 per axis.
    """
    toroidal = boundary is Boundary.TOROIDAL
    height, width = array.shape[:2]
    for rows_out, rows_in in _spans(dy, height, toroidal):
        for cols_out, cols_in in _spans(dx, width, toroidal):
            out[rows_out, cols_out] += array[rows_in, cols_in]


class CanvasField:
    """
    Per-channel intensity grid with in-place stigmergic dynamics.

    Attributes:
        width, height, channels: Immutable dimensions
        boundary: Bounded or Toroidal
        sigma_max: Saturation cap applied by deposit
        epsilon_floor: Values below this are flushed to 0 by evaporate
    """

    def __init__(
        self,
        width: int,
        height: int,
        channels: int,
        boundary: Union[str, Boundary] = Boundary.BOUNDED,
        sigma_max: float = DEFAULT_SIGMA_MAX,
        epsilon_floor: float = DEFAULT_EPSILON_FLOOR,
    ):
        self._width = _check_dimension("width", width, MAX_DIMENSION)
        self._height = _check_dimension("height", height, MAX_DIMENSION)
        self._channels = _check_dimension("channels", channels, MAX_CHANNELS)
        if self._width * self._height * self._channels > MAX_VALUES:
            raise ParameterError(
                f"width*height*channels must be <= {MAX_VALUES}, "
                f"got {self._width}*{self._height}*{self._channels}"
            )
        self._boundary = Boundary.parse(boundary)

        if not (math.isfinite(sigma_max) and sigma_max > 0):
            raise ParameterError(f"sigma_max must be finite and > 0, got {sigma_max}")
        if not (math.isfinite(epsilon_floor) and epsilon_floor >= 0):
            raise ParameterError(f"epsilon_floor must be finite and >= 0, got {epsilon_floor}")
        self.sigma_max = float(sigma_max)
        self.epsilon_floor = float(epsilon_floor)

        self._values = np.zeros((self._height, self._width, self._channels), dtype=np.float64)
        self._share: Optional[np.ndarray] = None
        self._retention: Optional[Tuple[float, np.ndarray]] = None

    @classmethod
    def from_array(
        cls,
        values: np.ndarray,
        boundary: Union[str, Boundary] = Boundary.BOUNDED,
        sigma_max: float = DEFAULT_SIGMA_MAX,
        epsilon_floor: float = DEFAULT_EPSILON_FLOOR,
    ) -> "CanvasField":
        """Build a field holding a copy of ``values`` shaped (height, width, channels)."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 3:
            raise ParameterError(f"values must be 3-dimensional (y, x, c), got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ParameterError("values must be finite and >= 0")
        height, width, channels = values.shape
        field = cls(width, height, channels, boundary, sigma_max, epsilon_floor)
        field._values[...] = values
        return field

    # =========================================================================
    # Shape and views
    # =========================================================================

    @property
    def width(self) -> int:
        return self._width

    @property
    def height(self) -> int:
        return self._height

    @property
    def channels(self) -> int:
        return self._channels

    @property
    def boundary(self) -> Boundary:
        return self._boundary

    @property
    def values(self) -> np.ndarray:
        """The backing array (read-only when this field is a frozen view)."""
        return self._values

    @property
    def cell_count(self) -> int:
        return self._width * self._height

    @property
    def is_frozen(self) -> bool:
        return not self._values.flags.writeable

    def copy(self) -> "CanvasField":
        """An independent, writable copy."""
        clone = self._like()
        clone._values = self._values.copy()
        return clone

    def frozen(self) -> "CanvasField":
        """A read-only view sharing this field's storage."""
        view = self._like()
        view._values = read_only_view(self._values)
        return view

    def _like(self) -> "CanvasField":
        clone = object.__new__(CanvasField)
        clone._width = self._width
        clone._height = self._height
        clone._channels = self._channels
        clone._boundary = self._boundary
        clone.sigma_max = self.sigma_max
        clone.epsilon_floor = self.epsilon_floor
        clone._share = None
        clone._retention = None
        return clone

    def is_blank(self) -> bool:
        return not np.any(self._values > 0)

    # =========================================================================
    # Validation helpers
    # =========================================================================

    def in_bounds(self, pos: Sequence[int]) -> bool:
        x, y = pos
        return 0 <= x < self._width and 0 <= y < self._height

    def _check_pos(self, pos: Sequence[int]) -> Cell:
        try:
            x, y = int(pos[0]), int(pos[1])
        except (TypeError, ValueError, IndexError):
            raise BoundsError(f"position must be an (x, y) pair, got {pos!r}") from None
        if not (0 <= x < self._width and 0 <= y < self._height):
            raise BoundsError(
                f"position {(x, y)} outside {self._width}x{self._height} canvas"
            )
        return x, y

    def _check_channel(self, channel: int) -> int:
        if isinstance(channel, bool) or not isinstance(channel, (int, np.integer)):
            raise ParameterError(f"channel must be an integer, got {channel!r}")
        if not 0 <= channel < self._channels:
            raise ParameterError(f"channel must be in [0, {self._channels}), got {channel}")
        return int(channel)

    def _check_writable(self) -> None:
        if not self._values.flags.writeable:
            raise FieldError("field is a read-only view")

    @staticmethod
    def _check_rate(name: str, rate: float) -> float:
        if not (isinstance(rate, (int, float, np.floating)) and 0.0 <= rate <= 1.0):
            raise ParameterError(f"{name} must be in [0, 1], got {rate!r}")
        return float(rate)

    # =========================================================================
    # Local operations
    # =========================================================================

    def neighborhood(self, pos: Sequence[int]) -> Neighborhood:
        """Moore neighborhood of ``pos`` in fixed order (center, N .. NW)."""
        x, y = self._check_pos(pos)
        toroidal = self._boundary is Boundary.TOROIDAL
        valid = []
        cells: List[Optional[Cell]] = []
        for dx, dy in MOORE_OFFSETS:
            nx, ny = x + dx, y + dy
            if toroidal:
                cells.append((nx % self._width, ny % self._height))
                valid.append(True)
            elif 0 <= nx < self._width and 0 <= ny < self._height:
                cells.append((nx, ny))
                valid.append(True)
            else:
                cells.append(None)
                valid.append(False)
        return Neighborhood(
            center=(x, y),
            offsets=MOORE_OFFSETS,
            valid=tuple(valid),
            cells=tuple(cells),
        )

    def moore_rows(self, pos: Sequence[int]) -> Tuple[Tuple[Optional[Cell], ...], Tuple[Optional[List[float]], ...]]:
        """
        The Moore neighborhood of ``pos`` with its channel vectors.

        Returns:
            (cells, rows) in neighborhood order; both are None where the
            offset falls off a bounded canvas
        """
        x, y = self._check_pos(pos)
        if 0 < x < self._width - 1 and 0 < y < self._height - 1:
            block = self._values[y - 1:y + 2, x - 1:x + 2].tolist()
            cells = tuple((x + dx, y + dy) for dx, dy in MOORE_OFFSETS)
            return cells, tuple(block[dy + 1][dx + 1] for dx, dy in MOORE_OFFSETS)

        cells = self.neighborhood((x, y)).cells
        rows = tuple(None if cell is None else self._values[cell[1], cell[0]].tolist() for cell in cells)
        return cells, rows

    def sense(self, pos: Sequence[int]) -> np.ndarray:
        """Per-channel mean over the valid Moore neighborhood of ``pos`` (center included)."""
        _, rows = self.moore_rows(pos)
        return np.array(moore_mean(rows))

    def deposit(self, pos: Sequence[int], channel: int, amount: float) -> float:
        """
        Add ink at one cell, clamping at ``sigma_max``.

        Returns:
            The amount actually added (smaller than ``amount`` when clamped)
        """
        self._check_writable()
        x, y = self._check_pos(pos)
        c = self._check_channel(channel)
        if not (math.isfinite(amount) and amount >= 0):
            raise ParameterError(f"deposit amount must be finite and >= 0, got {amount!r}")
        if amount == 0:
            return 0.0

        current = float(self._values[y, x, c])
        updated = min(current + amount, self.sigma_max)
        self._values[y, x, c] = updated
        return updated - current

    # =========================================================================
    # Global dynamics
    # =========================================================================

    def evaporate(self, rho: float) -> None:
        """Multiply every value by (1 - rho); flush values below the floor to 0."""
        self._check_writable()
        rho = self._check_rate("rho", rho)
        if rho == 0.0:
            return

        values = self._values
        np.multiply(values, 1.0 - rho, out=values)
        values[values < self.epsilon_floor] = 0.0

    def diffuse(self, lam: float) -> None:
        """
        Conservative von Neumann diffusion, synchronous from the pre-step values.

        Each cell keeps (1 - lam) * v and sends lam * v / 4 to each of its four
        neighbors. Under Bounded, shares aimed off-canvas stay home.
        """
        self._check_writable()
        lam = self._check_rate("lambda", lam)
        if lam == 0.0:
            return

        values = self._values
        if self._share is None:
            self._share = np.empty_like(values)
        share = np.multiply(values, lam / 4.0, out=self._share)

        if self._boundary is Boundary.TOROIDAL:
            values *= 1.0 - lam
        else:
            values *= self._retention_factor(lam)
        for dx, dy in VON_NEUMANN_OFFSETS:
            add_shifted(values, share, dx, dy, self._boundary)

    def _retention_factor(self, lam: float) -> np.ndarray:
        """Per-cell 1 - lam * senders / 4 for a bounded field, cached per rate."""
        if self._retention is None or self._retention[0] != lam:
            senders = np.zeros((self._height, self._width, 1), dtype=np.float64)
            ones = np.ones_like(senders)
            # a cell sends toward (dx, dy) when that neighbor exists
            for dx, dy in VON_NEUMANN_OFFSETS:
                add_shifted(senders, ones, dx, dy, Boundary.BOUNDED)
            self._retention = (lam, 1.0 - lam * senders / 4.0)
        return self._retention[1]

    def total_mass(self, channel: int) -> float:
        """Correctly rounded sum of one channel (independent of traversal order)."""
        c = self._check_channel(channel)
        return math.fsum(self._values[:, :, c].ravel().tolist())

    def masses(self) -> Tuple[float, ...]:
        return tuple(self.total_mass(c) for c in range(self._channels))

    def __repr__(self) -> str:
        return (
            f"CanvasField({self._width}x{self._height}x{self._channels}, "
            f"boundary={self._boundary.value})"
        )


# =============================================================================
# Functional API
# =============================================================================

def new_field(
    width: int,
    height: int,
    channels: int,
    boundary: Union[str, Boundary] = Boundary.BOUNDED,
    sigma_max: float = DEFAULT_SIGMA_MAX,
    epsilon_floor: float = DEFAULT_EPSILON_FLOOR,
) -> CanvasField:
    """Create an all-zero field."""
    field = CanvasField(width, height, channels, boundary, sigma_max, epsilon_floor)
    logger.debug(f"New field {field!r}")
    return field


def deposit(field: CanvasField, pos: Sequence[int], channel: int, amount: float) -> CanvasField:
    field.deposit(pos, channel, amount)
    return field


def sense(field: CanvasField, pos: Sequence[int]) -> np.ndarray:
    return field.sense(pos)


def evaporate(field: CanvasField, rho: float) -> CanvasField:
    field.evaporate(rho)
    return field


def diffuse(field: CanvasField, lam: float) -> CanvasField:
    field.diffuse(lam)
    return field


def total_mass(field: CanvasField, channel: int) -> float:
    return field.total_mass(channel)
