"""
Tests for configuration documents.
"""

from dataclasses import replace

import numpy as np
import pytest

from stigmergy_canvas import ConfigError, ParameterError, SimParams, load_config, parse_config, serialize_config
from stigmergy_canvas.config import KEYS
from stigmergy_canvas.habitat import Boundary


class TestParseConfig:
    """Tests for parsing documents."""

    def test_empty_document(self):
        """Test an empty document yields all defaults."""
        assert parse_config("") == SimParams()

    def test_defaults(self):
        """Test documented defaults."""
        params = parse_config("# nothing but a comment\n\n")
        assert (params.field.width, params.field.height, params.field.channels) == (512, 512, 3)
        assert params.field.boundary is Boundary.BOUNDED
        assert params.agents.count == 200
        assert params.agents.theta == (0.25,)
        assert params.behavior.inertia == (6.0, 3.0, 1.0, 0.3, 0.1)
        assert (params.dynamics.rho, params.dynamics.lam) == (0.015, 0.1)
        assert params.render.exposure == 0.6

    def test_values_and_comments(self):
        """Test typical keys, inline comments and list values."""
        params = parse_config(
            """
            field.width = 64      # canvas
            field.height = 32
            field.channels = 2
            field.boundary = toroidal
            agents.count = 32
            agents.allocation = 20, 12
            behavior.theta = 0.5, 2
            behavior.w_other = -0.25
            dynamics.lambda = 0.2
            run.seed = 18446744073709551615
            render.permanent = false
            palette.channel1 = 0, 128, 255
            palette.background = 10, 10, 10
            """
        )
        assert (params.field.width, params.field.height) == (64, 32)
        assert params.field.boundary is Boundary.TOROIDAL
        assert params.agents.allocation == (20, 12)
        assert params.agents.theta == (0.5, 2.0)
        assert params.behavior.w_other == -0.25
        assert params.dynamics.lam == 0.2
        assert params.run.seed == 2**64 - 1
        assert params.render.permanent is False
        assert params.render.channel_colors == ((1, (0, 128, 255)),)
        assert params.render.background == (10, 10, 10)

    def test_range_error_names_line_and_key(self):
        """Test rho = 1.5 cites the line, the key and the range."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("run.seed = 1\ndynamics.rho = 1.5\n")
        error = excinfo.value
        assert error.line == 2
        assert error.key == "dynamics.rho"
        assert "[0, 1]" in str(error)
        assert isinstance(error, ParameterError)

    def test_unknown_key(self):
        """Test typos are hard errors."""
        with pytest.raises(ConfigError, match="line 1, key 'dynamics.roh'"):
            parse_config("dynamics.roh = 0.1")

    def test_duplicate_key(self):
        """Test repeating a key is an error citing the second line."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("run.ticks = 5\nrun.ticks = 6\n")
        assert excinfo.value.line == 2

    @pytest.mark.parametrize("line", ["field.width 64", "= 3", "field.width ="])
    def test_malformed_line(self, line):
        """Test lines that are not key = value pairs."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config(f"# header\n{line}\n")
        assert excinfo.value.line == 2

    @pytest.mark.parametrize(
        "text",
        ["field.width = wide", "field.width = 1.5", "render.permanent = maybe", "palette.background = 1, 2"],
    )
    def test_bad_syntax(self, text):
        """Test values that do not parse."""
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_cross_key_rule_reports_offending_line(self):
        """Test a palette channel beyond C is reported on its own line."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("field.channels = 2\npalette.channel2 = 1, 2, 3\n")
        assert excinfo.value.line == 2
        assert excinfo.value.key == "palette.channel2"

    def test_zero_padded_channel_reports_line(self):
        """Test a zero-padded palette channel beyond C still names its line."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("field.channels = 2\n\npalette.channel03 = 1, 2, 3\n")
        assert excinfo.value.line == 3
        assert excinfo.value.key == "palette.channel3"

    def test_zero_padded_channel_is_duplicate(self):
        """Test palette.channel1 and palette.channel01 are the same key."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("palette.channel1 = 1, 2, 3\npalette.channel01 = 4, 5, 6\n")
        assert excinfo.value.line == 2
        assert "first set on line 1" in str(excinfo.value)

    def test_zero_padded_channel_accepted(self):
        """Test a lone zero-padded palette key sets that channel."""
        params = parse_config("field.channels = 2\npalette.channel01 = 4, 5, 6\n")
        assert params.render.channel_colors == ((1, (4, 5, 6)),)

    def test_allocation_must_sum(self):
        """Test allocations must cover agents.count exactly."""
        with pytest.raises(ConfigError) as excinfo:
            parse_config("agents.count = 4\nfield.channels = 2\nagents.allocation = 1, 1\n")
        assert excinfo.value.key == "agents.allocation"

    def test_load_config(self, tmp_path):
        """Test reading a document from disk."""
        path = tmp_path / "study.conf"
        path.write_text("agents.count = 3\n", encoding="utf-8")
        assert load_config(path).agents.count == 3


class TestSerializeConfig:
    """Tests for writing documents."""

    def test_writes_every_key(self):
        """Test every key except unset allocation appears once."""
        text = serialize_config(SimParams())
        keys = [line.split(" = ")[0] for line in text.splitlines() if not line.startswith("#")]
        assert keys == [k for k in KEYS if k != "agents.allocation"]

    def test_round_trip_defaults(self):
        """Test parse(serialize(defaults)) == defaults."""
        assert parse_config(serialize_config(SimParams())) == SimParams()

    def test_round_trip_random(self, make_params):
        """Test parse(serialize(p)) == p for randomly drawn valid params."""
        rng = np.random.default_rng(42)
        for _ in range(25):
            channels = int(rng.integers(1, 5))
            count = int(rng.integers(0, 40))
            split = rng.multinomial(count, [1 / channels] * channels)
            params = make_params(
                field={
                    "width": int(rng.integers(1, 300)),
                    "height": int(rng.integers(1, 300)),
                    "channels": channels,
                    "boundary": str(rng.choice(["bounded", "toroidal"])),
                },
                agents={
                    "count": count,
                    "allocation": tuple(int(n) for n in split) if rng.random() < 0.5 else None,
                    "theta": tuple(float(t) for t in rng.random(channels) + 0.01),
                },
                behavior={
                    "n": float(1 + rng.random() * 3),
                    "p0": float(rng.random()),
                    "q_amount": float(rng.random() + 1e-3),
                    "beta": float(rng.random() * 5),
                    "delta": float(rng.random()),
                    "w_own": float(rng.normal()),
                    "w_other": float(rng.normal()),
                    "inertia": tuple(float(w) for w in rng.random(5) + 0.01),
                },
                dynamics={"rho": float(rng.random()), "lam": float(rng.random()), "sigma_max": float(rng.random() * 20 + 0.1)},
                run={"seed": int(rng.integers(0, 2**62)), "ticks": int(rng.integers(0, 10_000))},
                metrics={"every": int(rng.integers(1, 50)), "coverage_threshold": float(rng.random())},
                render={
                    "permanent": bool(rng.random() < 0.5),
                    "exposure": float(rng.random() + 0.05),
                    "background": tuple(int(v) for v in rng.integers(0, 256, 3)),
                    "channel_colors": ((channels - 1, tuple(int(v) for v in rng.integers(0, 256, 3))),),
                },
            )
            assert parse_config(serialize_config(params)) == params

    def test_header_optional(self):
        """Test the header comment can be suppressed."""
        assert not serialize_config(SimParams(), header=None).startswith("#")


class TestSimParams:
    """Tests for cross-section validation."""

    def test_theta_length(self):
        """Test theta lists must hold 1 or C values."""
        with pytest.raises(ParameterError):
            parse_config("field.channels = 3\nbehavior.theta = 1, 2\n")

    def test_theta_for(self):
        """Test per-channel threshold lookup."""
        params = parse_config("field.channels = 2\nbehavior.theta = 0.5, 4\n")
        assert [params.theta_for(c) for c in range(2)] == [0.5, 4.0]
        single = replace(params, agents=replace(params.agents, theta=(2.0,)))
        assert single.theta_for(1) == 2.0
