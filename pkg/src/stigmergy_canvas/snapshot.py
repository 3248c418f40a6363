"""
Snapshot - Bit-Exact World Persistence
======================================

Binary, versioned, little-endian encoding of a WorldState. Restoring a
snapshot and stepping it gives exactly what stepping the original would.

LAYOUT (version 1):
    "SWRM"                      magic
    u16                         format version
    u32 + bytes                 configuration document (UTF-8)
    u64                         tick
    Philox state                counter 4xu64, key 2xu64, buffer 4xu64,
                                buffer_pos u32, has_uint32 u8, uinteger u32
    u8                          flags (bit 0: permanent ink layer present)
    f64[H*W*C]                  field values, row-major (y, x, c)
    f64[H*W*C]                  permanent ink layer (only if flagged)
    u64[C], f64[C]              deposit events / deposited mass per channel
    u32                         agent count
    per agent                   x u32, y u32, heading u8, channel u16,
                                theta f32, steps_since_deposit u32
    8 bytes                     BLAKE2b-64 checksum of everything above

License: MIT
"""

import hashlib
import logging
import struct
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from .agents import AgentState
from .config import parse_config, serialize_config
from .engine import InkLedger, WorldState
from .errors import ConfigError, ParameterError, SnapshotError
from .habitat import CanvasField

logger = logging.getLogger(__name__)

MAGIC = b"SWRM"
FORMAT_VERSION = 1
CHECKSUM_SIZE = 8

FLAG_INK = 0x01

_HEADER = struct.Struct("<4sH")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_RNG_TAIL = struct.Struct("<IBI")
_FLAGS = struct.Struct("<B")
_AGENT = struct.Struct("<IIBHfI")


def _checksum(data: bytes) -> bytes:
    return hashlib.blake2b(data, digest_size=CHECKSUM_SIZE).digest()


# =============================================================================
# Encoding
# =============================================================================

def encode_snapshot(world: WorldState) -> bytes:
    """Serialize ``world`` to snapshot bytes."""
    config = serialize_config(world.params).encode("utf-8")
    state = world.rng.bit_generator.state
    if state.get("bit_generator") != "Philox":
        raise SnapshotError(f"unsupported bit generator {state.get('bit_generator')!r}")

    parts = [
        _HEADER.pack(MAGIC, FORMAT_VERSION),
        _U32.pack(len(config)),
        config,
        _U64.pack(world.tick),
        np.asarray(state["state"]["counter"], dtype="<u8").tobytes(),
        np.asarray(state["state"]["key"], dtype="<u8").tobytes(),
        np.asarray(state["buffer"], dtype="<u8").tobytes(),
        _RNG_TAIL.pack(int(state["buffer_pos"]), int(state["has_uint32"]), int(state["uinteger"])),
    ]

    ink = world.ledger.ink
    parts.append(_FLAGS.pack(FLAG_INK if ink is not None else 0))
    parts.append(np.ascontiguousarray(world.field.values, dtype="<f8").tobytes())
    if ink is not None:
        parts.append(np.ascontiguousarray(ink, dtype="<f8").tobytes())

    parts.append(np.asarray(world.ledger.deposit_events, dtype="<u8").tobytes())
    parts.append(np.asarray(world.ledger.deposited_mass, dtype="<f8").tobytes())

    parts.append(_U32.pack(len(world.agents)))
    for agent in world.agents:
        x, y = agent.pos
        parts.append(
            _AGENT.pack(x, y, agent.heading, agent.channel, agent.theta, agent.steps_since_deposit)
        )

    body = b"".join(parts)
    return body + _checksum(body)


def snapshot_checksum(world: WorldState) -> str:
    """Hex checksum identifying the world's exact state."""
    return encode_snapshot(world)[-CHECKSUM_SIZE:].hex()


def save_snapshot(world: WorldState, path: Union[str, Path]) -> str:
    """
    Write ``world`` to ``path``.

    Returns:
        The snapshot checksum as hex
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_snapshot(world)
    path.write_bytes(data)
    checksum = data[-CHECKSUM_SIZE:].hex()
    logger.info(f"Saved snapshot {path} at tick {world.tick} ({len(data)} bytes, checksum {checksum})")
    return checksum


# =============================================================================
# Decoding
# =============================================================================

class _Reader:
    """Sequential reader that reports truncation as SnapshotError."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise SnapshotError(f"snapshot truncated at byte {self.offset} (needed {size} more)")
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> Tuple:
        return fmt.unpack(self.take(fmt.size))

    def array(self, dtype: str, count: int) -> np.ndarray:
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(itemsize * count), dtype=dtype).copy()


def decode_snapshot(data: bytes) -> WorldState:
    """
    Rebuild a WorldState from snapshot bytes.

    Raises:
        SnapshotError: on bad magic, unsupported version, checksum mismatch,
            truncation, trailing bytes, or inconsistent content
    """
    if len(data) < _HEADER.size + CHECKSUM_SIZE:
        raise SnapshotError("snapshot too short")
    magic, version = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotError(f"not a snapshot (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise SnapshotError(f"unsupported snapshot version {version} (expected {FORMAT_VERSION})")

    body, stored = data[:-CHECKSUM_SIZE], data[-CHECKSUM_SIZE:]
    if _checksum(body) != stored:
        raise SnapshotError("snapshot checksum mismatch")

    reader = _Reader(body)
    reader.take(_HEADER.size)

    (config_len,) = reader.unpack(_U32)
    try:
        params = parse_config(reader.take(config_len).decode("utf-8"))
    except (ConfigError, UnicodeDecodeError) as e:
        raise SnapshotError(f"snapshot configuration is invalid: {e}") from e

    (tick,) = reader.unpack(_U64)
    counter = reader.array("<u8", 4)
    key = reader.array("<u8", 2)
    buffer = reader.array("<u8", 4)
    buffer_pos, has_uint32, uinteger = reader.unpack(_RNG_TAIL)
    rng = np.random.Generator(np.random.Philox())
    rng.bit_generator.state = {
        "bit_generator": "Philox",
        "state": {"counter": counter.astype(np.uint64), "key": key.astype(np.uint64)},
        "buffer": buffer.astype(np.uint64),
        "buffer_pos": buffer_pos,
        "has_uint32": has_uint32,
        "uinteger": uinteger,
    }

    (flags,) = reader.unpack(_FLAGS)
    fp = params.field
    shape = (fp.height, fp.width, fp.channels)
    size = fp.height * fp.width * fp.channels
    try:
        field = CanvasField.from_array(
            reader.array("<f8", size).reshape(shape).astype(np.float64),
            boundary=fp.boundary,
            sigma_max=params.dynamics.sigma_max,
            epsilon_floor=params.dynamics.epsilon_floor,
        )
    except ParameterError as e:
        raise SnapshotError(f"snapshot field is invalid: {e}") from e

    ledger = InkLedger(fp.channels)
    if flags & FLAG_INK:
        ledger.ink = reader.array("<f8", size).reshape(shape).astype(np.float64)
    ledger.deposit_events = [int(n) for n in reader.array("<u8", fp.channels)]
    ledger.deposited_mass = [float(m) for m in reader.array("<f8", fp.channels)]

    (count,) = reader.unpack(_U32)
    agents = []
    for i in range(count):
        x, y, heading, channel, theta, steps = reader.unpack(_AGENT)
        try:
            agent = AgentState(
                id=i, pos=(x, y), heading=heading, channel=channel, theta=float(theta), steps_since_deposit=steps
            )
        except ParameterError as e:
            raise SnapshotError(f"snapshot agent {i} is invalid: {e}") from e
        if not agent.is_valid_for(field):
            raise SnapshotError(f"snapshot agent {i} lies outside the canvas or its channels")
        agents.append(agent)

    if reader.offset != len(body):
        raise SnapshotError(f"snapshot has {len(body) - reader.offset} trailing bytes")

    return WorldState(field=field, agents=agents, params=params, tick=tick, rng=rng, ledger=ledger)


def load_snapshot(path: Union[str, Path]) -> WorldState:
    """Read a snapshot file."""
    path = Path(path)
    world = decode_snapshot(path.read_bytes())
    logger.info(f"Restored snapshot {path} at tick {world.tick}")
    return world
