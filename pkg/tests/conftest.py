"""
Shared pytest fixtures for stigmergy-canvas tests.
"""

from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from stigmergy_canvas import BehaviorParams, CanvasField, SimParams
from stigmergy_canvas.params import (
    AgentsParams,
    DynamicsParams,
    FieldParams,
    MetricsParams,
    RenderParams,
    RunParams,
)

GOLDEN_DIR = Path(__file__).parent / "golden"

_SECTIONS = {
    "field": FieldParams,
    "agents": AgentsParams,
    "behavior": BehaviorParams,
    "dynamics": DynamicsParams,
    "run": RunParams,
    "metrics": MetricsParams,
    "render": RenderParams,
}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance experiments")
    parser.addoption("--update-golden", action="store_true", default=False, help="record or rewrite golden files")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def build_params(**sections) -> SimParams:
    """SimParams from per-section keyword dicts, e.g. build_params(field={"width": 8})."""
    records = {name: cls(**sections.get(name, {})) for name, cls in _SECTIONS.items()}
    return SimParams(**records)


@pytest.fixture
def make_params():
    """Factory building SimParams from per-section overrides."""
    return build_params


@pytest.fixture
def small_params():
    """16x16, 2 channels, 8 agents, 50 ticks; fast enough for every test."""
    return build_params(
        field={"width": 16, "height": 16, "channels": 2},
        agents={"count": 8},
        run={"seed": 7, "ticks": 50},
        metrics={"every": 5},
    )


@pytest.fixture
def toroidal_params(small_params):
    """small_params on a toroidal canvas."""
    return replace(small_params, field=replace(small_params.field, boundary="toroidal"))


@pytest.fixture
def blank_field():
    """Empty 5x4 bounded field with 2 channels."""
    return CanvasField(5, 4, 2)


@pytest.fixture
def random_field():
    """Bounded 7x6x3 field with reproducible random content."""
    rng = np.random.default_rng(1234)
    return CanvasField.from_array(rng.random((6, 7, 3)) * 5.0)


@pytest.fixture
def golden(request):
    """
    Compare bytes against tests/golden/<name>.

    A missing golden fails the test. Run with --update-golden to record
    missing files and rewrite ones that differ.
    """
    update = request.config.getoption("--update-golden")

    def check(name: str, data: bytes) -> None:
        path = GOLDEN_DIR / name
        if update:
            path.parent.mkdir(parents=True, exist_ok=True)
            if not path.exists() or path.read_bytes() != data:
                path.write_bytes(data)
            return
        if not path.exists():
            pytest.fail(f"missing golden {path}; record it with --update-golden")
        assert data == path.read_bytes(), f"output differs from golden {name}"

    return check
