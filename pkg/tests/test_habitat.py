"""
Tests for the canvas field.
"""

import numpy as np
import pytest

from stigmergy_canvas import (
    Boundary,
    BoundsError,
    CanvasField,
    FieldError,
    ParameterError,
    deposit,
    diffuse,
    evaporate,
    new_field,
    sense,
    total_mass,
)
from stigmergy_canvas.habitat import MOORE_OFFSETS, VON_NEUMANN_OFFSETS, add_shifted, moore_mean


def dense_diffusion_matrix(width, height, lam, boundary):
    """Transition matrix T with new = T @ old, built cell by cell."""
    n = width * height
    matrix = np.zeros((n, n))
    for y in range(height):
        for x in range(width):
            j = y * width + x
            matrix[j, j] += 1.0 - lam
            for dx, dy in VON_NEUMANN_OFFSETS:
                nx, ny = x + dx, y + dy
                if boundary is Boundary.TOROIDAL:
                    nx, ny = nx % width, ny % height
                elif not (0 <= nx < width and 0 <= ny < height):
                    matrix[j, j] += lam / 4.0
                    continue
                matrix[ny * width + nx, j] += lam / 4.0
    return matrix


def shifted_copy(array, dx, dy, boundary):
    """out[y, x] = array[y + dy, x + dx], read one cell at a time."""
    height, width = array.shape[:2]
    out = np.zeros_like(array)
    for y in range(height):
        for x in range(width):
            nx, ny = x + dx, y + dy
            if boundary is Boundary.TOROIDAL:
                nx, ny = nx % width, ny % height
            elif not (0 <= nx < width and 0 <= ny < height):
                continue
            out[y, x] = array[ny, nx]
    return out


class TestNewField:
    """Tests for field construction."""

    def test_single_cell(self):
        """Test a 1x1 field holds one zero."""
        field = new_field(1, 1, 1, Boundary.BOUNDED)
        assert field.values.shape == (1, 1, 1)
        assert field.values[0, 0, 0] == 0.0

    def test_dimensions(self):
        """Test a 256x256x3 field is all zero."""
        field = new_field(256, 256, 3)
        assert (field.width, field.height, field.channels) == (256, 256, 3)
        assert not field.values.any()

    def test_toroidal_mass(self):
        """Test a fresh toroidal field has no mass."""
        field = new_field(3, 3, 1, "toroidal")
        assert field.boundary is Boundary.TOROIDAL
        assert total_mass(field, 0) == 0.0

    @pytest.mark.parametrize("width, height, channels", [(0, 4, 1), (4, 0, 1), (4, 4, 0), (-1, 4, 1)])
    def test_zero_dimension_rejected(self, width, height, channels):
        """Test zero or negative dimensions raise ParameterError."""
        with pytest.raises(ParameterError):
            new_field(width, height, channels)

    def test_overflow_scale_rejected(self):
        """Test a field too large to address is refused before allocation."""
        with pytest.raises(ParameterError, match="width\\*height\\*channels"):
            new_field(65535, 65535, 255)

    def test_unknown_boundary(self):
        """Test an unknown boundary name is a ParameterError."""
        with pytest.raises(ParameterError):
            new_field(3, 3, 1, "spherical")


class TestNeighborhood:
    """Tests for Moore neighborhoods."""

    @pytest.mark.parametrize("pos, expected", [((0, 0), 4), ((4, 3), 4), ((2, 0), 6), ((0, 2), 6), ((2, 2), 9)])
    def test_bounded_valid_counts(self, blank_field, pos, expected):
        """Test corner, edge and interior cells on a bounded canvas."""
        assert blank_field.neighborhood(pos).valid_count == expected

    def test_toroidal_all_valid(self):
        """Test every position is valid under toroidal wrap."""
        field = CanvasField(5, 4, 1, Boundary.TOROIDAL)
        hood = field.neighborhood((0, 0))
        assert hood.valid_count == 9
        assert hood.cells[1] == (0, 3)  # N wraps to the bottom row
        assert hood.cells[8] == (4, 3)  # NW wraps to the far corner

    def test_fixed_order(self, blank_field):
        """Test cells come as center, N, NE, E, SE, S, SW, W, NW."""
        hood = blank_field.neighborhood((2, 2))
        assert hood.cells == ((2, 2), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (1, 3), (1, 2), (1, 1))

    def test_out_of_bounds(self, blank_field):
        """Test positions off the canvas raise BoundsError."""
        with pytest.raises(BoundsError):
            blank_field.neighborhood((5, 0))


class TestDeposit:
    """Tests for depositing ink."""

    def test_zero_amount(self, random_field):
        """Test depositing nothing leaves the field unchanged."""
        before = random_field.values.copy()
        deposit(random_field, (1, 1), 0, 0.0)
        assert np.array_equal(random_field.values, before)

    def test_empty_cell(self, blank_field):
        """Test one unit lands on an empty cell."""
        added = blank_field.deposit((1, 2), 1, 1.0)
        assert added == 1.0
        assert blank_field.values[2, 1, 1] == 1.0
        assert total_mass(blank_field, 0) == 0.0

    def test_clamps_at_cap(self, blank_field):
        """Test values saturate at sigma_max and the added amount is reported."""
        blank_field.deposit((0, 0), 0, 9.5)
        added = blank_field.deposit((0, 0), 0, 1.0)
        assert blank_field.values[0, 0, 0] == 10.0
        assert added == 0.5

    def test_only_target_changes(self, random_field):
        """Test no other cell or channel changes."""
        before = random_field.values.copy()
        random_field.deposit((3, 2), 2, 0.5)
        diff = random_field.values != before
        assert diff.sum() == 1
        assert diff[2, 3, 2]

    def test_linear_below_cap(self):
        """Test deposit(a) then deposit(b) equals deposit(a + b)."""
        split = CanvasField(2, 2, 1)
        split.deposit((1, 1), 0, 0.25)
        split.deposit((1, 1), 0, 1.5)
        whole = CanvasField(2, 2, 1)
        whole.deposit((1, 1), 0, 1.75)
        assert np.array_equal(split.values, whole.values)

    def test_negative_amount(self, blank_field):
        """Test negative amounts are rejected."""
        with pytest.raises(ParameterError):
            blank_field.deposit((0, 0), 0, -1.0)

    def test_out_of_bounds(self, blank_field):
        """Test depositing off the canvas raises BoundsError."""
        with pytest.raises(BoundsError):
            blank_field.deposit((0, 4), 0, 1.0)

    def test_bad_channel(self, blank_field):
        """Test depositing on a missing channel raises ParameterError."""
        with pytest.raises(ParameterError):
            blank_field.deposit((0, 0), 2, 1.0)

    def test_frozen_view_rejects_writes(self, blank_field):
        """Test a frozen view cannot be mutated but sees later writes."""
        view = blank_field.frozen()
        with pytest.raises(FieldError):
            view.deposit((0, 0), 0, 1.0)
        with pytest.raises(FieldError):
            view.evaporate(0.5)
        blank_field.deposit((0, 0), 0, 1.0)
        assert view.values[0, 0, 0] == 1.0

    def test_frozen_view_cannot_be_unlocked(self, blank_field):
        """Test the read-only flag on a frozen view cannot be cleared."""
        view = blank_field.frozen()
        with pytest.raises(ValueError):
            view.values.flags.writeable = True
        with pytest.raises(ValueError):
            view.values[0, 0, 0] = 5.0
        assert blank_field.is_blank()


class TestSense:
    """Tests for Moore-mean sensing."""

    def test_blank(self, blank_field):
        """Test a blank field senses zero."""
        assert not sense(blank_field, (2, 2)).any()

    def test_uniform(self):
        """Test a uniform field senses its value everywhere, edges included."""
        field = CanvasField.from_array(np.full((4, 5, 2), 0.75))
        for pos in [(0, 0), (2, 0), (2, 2)]:
            assert sense(field, pos).tolist() == [0.75, 0.75]

    def test_center_spike(self):
        """Test a 9.0 spike at the center of 3x3 senses as 1.0."""
        field = CanvasField(3, 3, 1)
        field.deposit((1, 1), 0, 9.0)
        assert sense(field, (1, 1))[0] == pytest.approx(1.0)

    def test_corner_excludes_invalid(self):
        """Test off-canvas cells leave the denominator."""
        field = CanvasField(3, 3, 1)
        field.deposit((0, 0), 0, 4.0)
        assert sense(field, (0, 0))[0] == pytest.approx(1.0)

    def test_locality(self, random_field):
        """Test cells outside the neighborhood do not affect the result."""
        before = sense(random_field, (4, 3))
        random_field.deposit((0, 0), 0, 3.0)
        random_field.deposit((6, 5), 1, 3.0)
        assert np.array_equal(sense(random_field, (4, 3)), before)


class TestEvaporate:
    """Tests for evaporation."""

    def test_zero_rate_identity(self, random_field):
        """Test rho = 0 is bit-identical."""
        before = random_field.values.copy()
        evaporate(random_field, 0.0)
        assert np.array_equal(random_field.values, before)

    def test_full_rate_annihilates(self, random_field):
        """Test rho = 1 clears the field."""
        evaporate(random_field, 1.0)
        assert random_field.is_blank()

    def test_single_value(self):
        """Test 1.0 with rho 0.1 becomes 0.9."""
        field = CanvasField(1, 1, 1)
        field.deposit((0, 0), 0, 1.0)
        field.evaporate(0.1)
        assert field.values[0, 0, 0] == pytest.approx(0.9)

    def test_floor_flush(self):
        """Test values decaying below the floor become exactly zero."""
        field = CanvasField(2, 1, 1, epsilon_floor=1e-3)
        field.deposit((0, 0), 0, 1.5e-3)
        field.deposit((1, 0), 0, 1.0)
        field.evaporate(0.5)
        assert field.values[0, 0, 0] == 0.0
        assert field.values[0, 1, 0] == 0.5

    def test_mass_scaling(self, random_field):
        """Test mass scales by (1 - rho) when nothing crosses the floor."""
        before = random_field.masses()
        random_field.evaporate(0.015)
        for old, new in zip(before, random_field.masses()):
            assert new == pytest.approx(0.985 * old, rel=1e-9)

    @pytest.mark.parametrize("rho", [-0.1, 1.5, float("nan")])
    def test_bad_rate(self, blank_field, rho):
        """Test rates outside [0, 1] are rejected."""
        with pytest.raises(ParameterError):
            blank_field.evaporate(rho)


class TestDiffuse:
    """Tests for conservative diffusion."""

    def test_zero_rate_identity(self, random_field):
        """Test lambda = 0 is bit-identical."""
        before = random_field.values.copy()
        diffuse(random_field, 0.0)
        assert np.array_equal(random_field.values, before)

    def test_uniform_toroidal_unchanged(self):
        """Test a uniform toroidal field is a fixed point."""
        field = CanvasField.from_array(np.full((4, 4, 1), 2.0), boundary="toroidal")
        field.diffuse(0.3)
        assert np.allclose(field.values, 2.0, rtol=0, atol=1e-15)

    def test_spike_toroidal(self):
        """Test a 3x3 toroidal spike with lambda 0.5."""
        field = CanvasField(3, 3, 1, Boundary.TOROIDAL)
        field.deposit((1, 1), 0, 1.0)
        field.diffuse(0.5)
        expected = np.array([[0.0, 0.125, 0.0], [0.125, 0.5, 0.125], [0.0, 0.125, 0.0]])
        assert np.allclose(field.values[:, :, 0], expected, rtol=0, atol=1e-15)

    def test_corner_keeps_off_canvas_share(self):
        """Test bounded shares aimed off-canvas stay home."""
        field = CanvasField(3, 3, 1)
        field.deposit((0, 0), 0, 1.0)
        field.diffuse(0.4)
        assert field.values[0, 0, 0] == pytest.approx(0.6 + 0.2)
        assert field.values[0, 1, 0] == pytest.approx(0.1)
        assert field.values[1, 0, 0] == pytest.approx(0.1)

    @pytest.mark.parametrize("boundary", list(Boundary))
    @pytest.mark.parametrize("lam", [0.1, 0.5, 1.0])
    def test_conserves_mass(self, boundary, lam):
        """Test per-channel mass is conserved in both boundary modes."""
        rng = np.random.default_rng(99)
        field = CanvasField.from_array(rng.random((9, 11, 2)) * 3, boundary=boundary)
        before = field.masses()
        for _ in range(10):
            field.diffuse(lam)
        for old, new in zip(before, field.masses()):
            assert new == pytest.approx(old, rel=1e-9)

    @pytest.mark.parametrize("boundary", list(Boundary))
    @pytest.mark.parametrize(
        "width, height", [(w, h) for w in (3, 4, 5) for h in (3, 4, 5)] + [(1, 4), (2, 5), (1, 1)]
    )
    def test_matches_dense_matrix(self, boundary, width, height):
        """Test diffusion equals an explicit transition-matrix product on small grids."""
        rng = np.random.default_rng(width * 10 + height)
        values = rng.random((height, width, 2))
        field = CanvasField.from_array(values, boundary=boundary)
        field.diffuse(0.35)

        matrix = dense_diffusion_matrix(width, height, 0.35, boundary)
        for c in range(2):
            expected = matrix @ values[:, :, c].ravel()
            assert np.allclose(field.values[:, :, c].ravel(), expected, rtol=0, atol=1e-12)

    def test_bad_rate(self, blank_field):
        """Test lambda outside [0, 1] is rejected."""
        with pytest.raises(ParameterError):
            blank_field.diffuse(1.01)


class TestTotalMass:
    """Tests for mass accounting."""

    def test_blank(self, blank_field):
        """Test a blank field has zero mass."""
        assert total_mass(blank_field, 1) == 0.0

    def test_single_deposit(self, blank_field):
        """Test one deposit of 2.5."""
        blank_field.deposit((3, 1), 0, 2.5)
        assert total_mass(blank_field, 0) == 2.5

    def test_thousand_unit_deposits(self):
        """Test 1000 unit deposits sum to exactly 1000."""
        field = CanvasField(50, 50, 1)
        for i in range(1000):
            field.deposit((i % 50, i // 50), 0, 1.0)
        assert total_mass(field, 0) == 1000.0

    def test_bad_channel(self, blank_field):
        """Test a missing channel raises ParameterError."""
        with pytest.raises(ParameterError):
            total_mass(blank_field, 5)


class TestNonNegativity:
    """Property: no operation sequence produces a negative value."""

    @pytest.mark.parametrize("boundary", list(Boundary))
    def test_random_sequence(self, boundary):
        """Test random deposits, evaporation and diffusion stay non-negative and finite."""
        rng = np.random.default_rng(5)
        field = CanvasField(6, 5, 2, boundary)
        for _ in range(200):
            op = rng.integers(3)
            if op == 0:
                field.deposit((int(rng.integers(6)), int(rng.integers(5))), int(rng.integers(2)), float(rng.random() * 4))
            elif op == 1:
                field.evaporate(float(rng.random() * 0.2))
            else:
                field.diffuse(float(rng.random()))
            assert (field.values >= 0).all()
            assert np.isfinite(field.values).all()


class TestAddShifted:
    """Tests for in-place neighbor alignment."""

    def test_bounded_zero_fill(self):
        """Test bounded shifts read off-canvas as zero."""
        array = np.arange(6, dtype=float).reshape(2, 3)
        out = np.zeros_like(array)
        add_shifted(out, array, 1, 0, Boundary.BOUNDED)
        assert out.tolist() == [[1.0, 2.0, 0.0], [4.0, 5.0, 0.0]]

    def test_toroidal_wraps(self):
        """Test toroidal shifts wrap around."""
        array = np.arange(6, dtype=float).reshape(2, 3)
        out = np.zeros_like(array)
        add_shifted(out, array, 0, -1, Boundary.TOROIDAL)
        assert out.tolist() == [[3.0, 4.0, 5.0], [0.0, 1.0, 2.0]]

    @pytest.mark.parametrize("boundary", list(Boundary))
    @pytest.mark.parametrize("shape", [(1, 1), (1, 3), (2, 2), (4, 5)])
    def test_matches_cellwise_reads(self, boundary, shape):
        """Test every Moore offset against reading each neighbor cell by cell."""
        rng = np.random.default_rng(17)
        array = rng.random(shape + (2,))
        for dx, dy in MOORE_OFFSETS:
            out = np.ones_like(array)
            add_shifted(out, array, dx, dy, boundary)
            assert np.array_equal(out, 1.0 + shifted_copy(array, dx, dy, boundary))


class TestMooreRows:
    """Tests for neighborhood reads."""

    @pytest.mark.parametrize("boundary", list(Boundary))
    def test_rows_match_cells(self, random_field, boundary):
        """Test every row is the channel vector of its cell, interior and edge alike."""
        field = CanvasField.from_array(random_field.values, boundary=boundary)
        for pos in [(0, 0), (3, 2), (6, 5), (6, 2), (2, 0)]:
            cells, rows = field.moore_rows(pos)
            assert cells == field.neighborhood(pos).cells
            for cell, row in zip(cells, rows):
                if cell is None:
                    assert row is None
                else:
                    assert row == field.values[cell[1], cell[0]].tolist()

    def test_mean_of_valid_rows(self):
        """Test the Moore mean skips invalid rows."""
        assert moore_mean([[1.0, 2.0], None, [3.0, 6.0]]) == [2.0, 4.0]


class TestDiffusionState:
    """Tests for diffusion reusing its buffers."""

    def test_rate_change_refreshes_retention(self):
        """Test a bounded field diffused at two rates matches fresh fields."""
        rng = np.random.default_rng(8)
        values = rng.random((4, 5, 1))
        reused = CanvasField.from_array(values)
        reused.diffuse(0.2)
        reused.diffuse(0.6)

        fresh = CanvasField.from_array(values)
        fresh.diffuse(0.2)
        other = CanvasField.from_array(fresh.values)
        other.diffuse(0.6)
        assert np.array_equal(reused.values, other.values)

    def test_copy_diffuses_independently(self):
        """Test a copy owns its buffers and leaves the original alone."""
        field = CanvasField(4, 4, 1, "toroidal")
        field.deposit((1, 1), 0, 1.0)
        field.diffuse(0.5)
        clone = field.copy()
        clone.diffuse(0.5)
        assert field.values[1, 1, 0] == 0.5
        assert clone.total_mass(0) == pytest.approx(1.0, rel=1e-12)
