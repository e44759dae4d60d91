import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractalscan import (
    BOUSTROPHEDON,
    HILBERT,
    MORTON,
    RASTER,
    BlockConfig,
    GridShape,
    LengthMismatch,
    PatchGrid,
    ShapeMismatch,
    block_forward,
    block_opcount,
    deserialize,
    direction_orders,
    generate_hilbert,
    grid_from_json,
    grid_to_json,
    serialize,
)

ALL_KINDS = (HILBERT, RASTER, BOUSTROPHEDON, MORTON)


def _random_grid(rng, rows, cols, channels):
    return PatchGrid(GridShape(rows, cols), rng.standard_normal((rows, cols, channels)))


def _transpose(grid: PatchGrid) -> PatchGrid:
    return PatchGrid(grid.shape.transposed(), grid.data.transpose(1, 0, 2))


def _rot180(grid: PatchGrid) -> PatchGrid:
    return PatchGrid(grid.shape, grid.data[::-1, ::-1, :])


class TestPatchGrid:
    def test_from_array_promotes_2d(self):
        grid = PatchGrid.from_array(np.zeros((3, 4)))
        assert grid.shape == GridShape(3, 4)
        assert grid.channels == 1

    def test_rejects_bad_shapes(self):
        with pytest.raises(ShapeMismatch):
            PatchGrid(GridShape(2, 2), np.zeros((2, 3, 1)))
        with pytest.raises(ShapeMismatch):
            PatchGrid.from_array(np.zeros(5))

    def test_rejects_non_finite(self):
        data = np.zeros((2, 2, 1))
        data[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            PatchGrid(GridShape(2, 2), data)

    def test_data_read_only(self):
        grid = PatchGrid.from_array(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            grid.data[0, 0, 0] = 1.0


class TestSerialize:
    def test_single_cell(self):
        grid = PatchGrid.from_array(np.array([[5.0]]))
        order = generate_hilbert(0, 1)
        assert np.array_equal(serialize(grid, order), [[5.0]])

    def test_2x2_depth1_values(self):
        data = np.array([[0.0, 1.0], [2.0, 3.0]])
        grid = PatchGrid.from_array(data)
        seq = serialize(grid, generate_hilbert(1, 1))
        assert np.array_equal(seq[:, 0], [0.0, 1.0, 3.0, 2.0])

    def test_shape_guard(self):
        grid = PatchGrid.from_array(np.zeros((2, 2)))
        with pytest.raises(ShapeMismatch):
            serialize(grid, generate_hilbert(2, 1))

    @given(
        kind=st.sampled_from(ALL_KINDS),
        rows=st.integers(min_value=1, max_value=8),
        cols=st.integers(min_value=1, max_value=8),
        channels=st.integers(min_value=1, max_value=4),
        seed=st.integers(min_value=0, max_value=999),
    )
    def test_round_trip_is_bitwise(self, kind, rows, cols, channels, seed):
        rng = np.random.default_rng(seed)
        grid = _random_grid(rng, rows, cols, channels)
        for order in direction_orders(kind, grid.shape):
            back = deserialize(serialize(grid, order), order)
            assert np.array_equal(back.data, grid.data)


class TestDeserialize:
    def test_impulse_lands_on_forward(self):
        order = generate_hilbert(2, 1)
        rng = np.random.default_rng(0)
        for i in rng.integers(0, 16, 3):
            seq = np.zeros((16, 1))
            seq[i, 0] = 1.0
            grid = deserialize(seq, order)
            r, c = order.forward[i]
            expected = np.zeros((4, 4, 1))
            expected[r, c, 0] = 1.0
            assert np.array_equal(grid.data, expected)

    def test_constant_sequence_gives_constant_grid(self):
        order = generate_hilbert(2, 3)
        grid = deserialize(np.full((16, 2), 7.5), order)
        assert (grid.data == 7.5).all()

    def test_length_guard(self):
        with pytest.raises(LengthMismatch):
            deserialize(np.zeros((5, 1)), generate_hilbert(1, 1))


class TestDirectionOrders:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("shape", [(8, 8), (5, 7)])
    def test_four_bijections(self, kind, shape):
        rows, cols = shape
        orders = direction_orders(kind, GridShape(rows, cols))
        assert len(orders) == 4
        for order in orders:
            assert sorted(order.cells()) == [
                (r, c) for r in range(rows) for c in range(cols)
            ]

    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("shape", [(8, 8), (5, 7)])
    def test_closed_under_transpose(self, kind, shape):
        rows, cols = shape
        orders = direction_orders(kind, GridShape(rows, cols))
        transposed = direction_orders(kind, GridShape(cols, rows))
        pairing = {0: 1, 1: 0, 2: 3, 3: 2}
        for i, j in pairing.items():
            swapped = transposed[j].forward[:, ::-1]
            assert np.array_equal(orders[i].forward, swapped)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_closed_under_rot180(self, kind):
        orders = direction_orders(kind, GridShape(8, 8))
        pairing = {0: 3, 1: 2}
        for i, j in pairing.items():
            rotated = 7 - orders[j].forward
            assert np.array_equal(orders[i].forward, rotated)

    def test_shift_applies_to_every_direction(self):
        shape = GridShape(4, 4)
        plain = direction_orders(HILBERT, shape)
        shifted = direction_orders(HILBERT, shape, shift=1)
        for base, moved in zip(plain, shifted):
            want = (base.forward[:, 0] + 1) % 4
            assert np.array_equal(moved.forward[:, 0], want)
            assert np.array_equal(moved.forward[:, 1], base.forward[:, 1])


class TestBlockForward:
    def test_identity_configuration(self):
        rng = np.random.default_rng(1)
        config = BlockConfig(param_mode="identity", merge_rule="mean")
        for _ in range(5):
            grid = _random_grid(rng, 8, 8, 2)
            out = block_forward(grid, config)
            assert np.abs(out.data - grid.data).max() <= 1e-12

    def test_identity_sum_is_four_times_input(self):
        rng = np.random.default_rng(2)
        grid = _random_grid(rng, 4, 4, 1)
        out = block_forward(grid, BlockConfig(param_mode="identity", merge_rule="sum"))
        assert np.abs(out.data - 4.0 * grid.data).max() <= 1e-12

    @pytest.mark.parametrize("kind", ALL_KINDS)
    @pytest.mark.parametrize("merge", ["sum", "mean"])
    def test_transpose_equivariance(self, kind, merge):
        rng = np.random.default_rng(3)
        config = BlockConfig(curve_kind=kind, state_size=4, merge_rule=merge)
        for _ in range(3):
            grid = _random_grid(rng, 8, 8, 3)
            direct = _transpose(block_forward(grid, config))
            routed = block_forward(_transpose(grid), config)
            assert np.abs(direct.data - routed.data).max() <= 1e-10

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_rot180_equivariance(self, kind):
        rng = np.random.default_rng(4)
        config = BlockConfig(curve_kind=kind, state_size=4)
        for _ in range(3):
            grid = _random_grid(rng, 8, 8, 3)
            direct = _rot180(block_forward(grid, config))
            routed = block_forward(_rot180(grid), config)
            assert np.abs(direct.data - routed.data).max() <= 1e-10

    def test_transpose_equivariance_on_rectangles(self):
        rng = np.random.default_rng(5)
        config = BlockConfig(curve_kind=HILBERT, state_size=2)
        grid = _random_grid(rng, 5, 7, 2)
        direct = _transpose(block_forward(grid, config))
        routed = block_forward(_transpose(grid), config)
        assert np.abs(direct.data - routed.data).max() <= 1e-10

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(6)
        grid = _random_grid(rng, 8, 8, 2)
        config = BlockConfig(param_seed=42)
        first = block_forward(grid, config)
        second = block_forward(grid, config)
        assert np.array_equal(first.data, second.data)

    def test_seed_changes_output(self):
        rng = np.random.default_rng(7)
        grid = _random_grid(rng, 8, 8, 1)
        a = block_forward(grid, BlockConfig(param_seed=0))
        b = block_forward(grid, BlockConfig(param_seed=1))
        assert not np.array_equal(a.data, b.data)

    @pytest.mark.parametrize(
        ("kind", "rows", "cols", "channels"),
        [(HILBERT, 5, 7, 3), (RASTER, 3, 9, 2), (MORTON, 8, 8, 1), (HILBERT, 1, 1, 2)],
    )
    def test_shape_preservation(self, kind, rows, cols, channels):
        rng = np.random.default_rng(8)
        grid = _random_grid(rng, rows, cols, channels)
        out = block_forward(grid, BlockConfig(curve_kind=kind, state_size=2))
        assert out.shape == grid.shape
        assert out.channels == channels
        assert np.isfinite(out.data).all()

    def test_shifted_block_runs(self):
        rng = np.random.default_rng(9)
        grid = _random_grid(rng, 8, 8, 1)
        out = block_forward(grid, BlockConfig(shift=2, state_size=2))
        assert out.shape == grid.shape

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BlockConfig(curve_kind="peano")
        with pytest.raises(ValueError):
            BlockConfig(state_size=0)
        with pytest.raises(ValueError):
            BlockConfig(merge_rule="max")
        with pytest.raises(ValueError):
            BlockConfig(param_mode="learned")


class TestBlockOpcount:
    def test_closed_form(self):
        config = BlockConfig(state_size=4, merge_rule="sum")
        length = 64
        assert block_opcount(GridShape(8, 8), config, channels=2) == (
            4 * 2 * length * (7 * 4 - 1) + 3 * length * 2
        )

    def test_mean_adds_one_scale_per_element(self):
        sum_config = BlockConfig(state_size=4, merge_rule="sum")
        mean_config = BlockConfig(state_size=4, merge_rule="mean")
        shape = GridShape(8, 8)
        assert (
            block_opcount(shape, mean_config) - block_opcount(shape, sum_config) == 64
        )

    def test_identity_mode_uses_single_state_channel(self):
        config = BlockConfig(param_mode="identity", merge_rule="mean")
        assert block_opcount(GridShape(1, 1), config) == 4 * (7 - 1) + 3 + 1

    def test_affine_in_cell_count(self):
        config = BlockConfig()
        sides = (8, 16, 32, 64)
        lengths = np.array([s * s for s in sides], dtype=np.float64)
        counts = np.array(
            [block_opcount(GridShape(s, s), config) for s in sides], dtype=np.float64
        )
        slope, intercept = np.polyfit(lengths, counts, 1)
        residual = np.abs(slope * lengths + intercept - counts) / counts
        assert residual.max() < 0.01

    def test_channels_guard(self):
        with pytest.raises(ValueError):
            block_opcount(GridShape(2, 2), BlockConfig(), channels=0)


class TestGridJson:
    def test_round_trip(self):
        rng = np.random.default_rng(10)
        grid = _random_grid(rng, 3, 5, 2)
        back = grid_from_json(grid_to_json(grid))
        assert back.shape == grid.shape
        assert np.array_equal(back.data, grid.data)

    def test_document_layout(self):
        grid = PatchGrid.from_array(np.arange(6.0).reshape(2, 3))
        doc = json.loads(grid_to_json(grid))
        assert doc == {
            "rows": 2,
            "cols": 3,
            "channels": 1,
            "data": [0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        }

    def test_malformed_documents(self):
        with pytest.raises(ValueError):
            grid_from_json('{"rows": 2, "cols": 2}')
        with pytest.raises(ValueError):
            grid_from_json('{"rows": 2, "cols": 2, "channels": 1, "data": [1.0]}')
        with pytest.raises(json.JSONDecodeError):
            grid_from_json("not json")
