import numpy as np
import pytest
from hypothesis import given, strategies as st

import channelsim as cs
from channelsim.errors import InvalidArgumentError
from channelsim.geometry import BarrierModel, ChannelGeometry


@pytest.fixture(scope="module")
def grid():
    # x in [-12.5, 12.25], y in [-6.25, 6.0]
    return cs.build_grid(100, 50, 0.25, 0.25, -12.5, -6.25)


@pytest.fixture(scope="module")
def geom():
    # slab over 10 columns (x in [0, 2.25]), opening of 20 rows
    return ChannelGeometry(x_in=0.0, ell=2.25, a=5.0, y_center=-0.125)


class TestWallMask:
    def test_masked_point_count(self, grid, geom):
        # 10 slab columns x (50 - 20 open rows) material rows
        mask = cs.wall_mask(grid, geom)
        cols = np.unique(np.nonzero(mask)[1])
        assert cols.size == 10
        assert mask.sum() == 10 * (50 - 20)

    def test_full_width_channel_is_no_material(self, grid):
        geom = ChannelGeometry(x_in=0.0, ell=2.0, a=13.0, y_center=-0.125)
        assert not cs.wall_mask(grid, geom).any()

    def test_outside_slab_false(self, grid, geom):
        mask = cs.wall_mask(grid, geom)
        i_before = grid.x_index(geom.x_in) - 1
        i_after = grid.x_index(geom.x_out) + 1
        assert not mask[:, i_before].any()
        assert not mask[:, i_after].any()

    def test_closed_channel_masks_all_rows(self, grid):
        geom = ChannelGeometry(x_in=0.0, ell=1.0, a=0.0)
        mask = cs.wall_mask(grid, geom)
        i = grid.x_index(0.5)
        assert mask[:, i].all()

    def test_geometry_outside_grid_rejected(self, grid):
        with pytest.raises(InvalidArgumentError):
            cs.wall_mask(grid, ChannelGeometry(x_in=-20.0, ell=5.0, a=4.0))
        with pytest.raises(InvalidArgumentError):
            cs.wall_mask(grid, ChannelGeometry(x_in=0.0, ell=2.0, a=13.0, y_center=3.0))

    def test_mirror_symmetry_about_centerline(self, grid):
        geom = ChannelGeometry(x_in=0.0, ell=2.0, a=4.0, y_center=-0.25)
        mask = cs.wall_mask(grid, geom)
        # y_center sits on the grid: reflecting rows about it maps mask to itself
        j_c = int(round((geom.y_center - grid.y0) / grid.dy))
        assert grid.y()[j_c] == geom.y_center
        for dj in range(1, min(j_c, grid.ny - 1 - j_c)):
            assert (mask[j_c - dj] == mask[j_c + dj]).all()


class TestPotential:
    def test_step_values(self, grid, geom):
        v = cs.build_potential(grid, geom, BarrierModel("step", v0=7.0))
        mask = cs.wall_mask(grid, geom)
        assert np.all(v.data.real[mask] == 7.0)
        assert np.all(v.data.real[~mask] == 0.0)

    def test_step_centerline_open(self, grid, geom):
        v = cs.build_potential(grid, geom, BarrierModel("step", v0=7.0))
        i_mid = grid.x_index(geom.x_in + geom.ell / 2)
        j_mid = int(round((geom.y_center - grid.y0) / grid.dy))
        assert v.data.real[j_mid, i_mid] == 0.0

    def test_step_equals_mask_point_set(self, grid, geom):
        v = cs.build_potential(grid, geom, BarrierModel("step", v0=3.0))
        mask = cs.wall_mask(grid, geom)
        assert np.array_equal(v.data.real == 3.0, mask)

    def test_hard_potential_zero(self, grid, geom):
        v = cs.build_potential(grid, geom, BarrierModel("hard"))
        assert not v.data.any()

    def test_smooth_matches_step_away_from_boundary(self, grid, geom):
        w = 2 * grid.dx
        vs = cs.build_potential(grid, geom, BarrierModel("smooth", v0=5.0, w=w))
        vstep = cs.build_potential(grid, geom, BarrierModel("step", v0=5.0))
        from channelsim.geometry import _material_signed_distance

        d = _material_signed_distance(grid, geom)
        far = np.abs(d) > w  # outside a band of width 2w centered on the boundary
        assert np.max(np.abs(vs.data.real[far] - vstep.data.real[far])) == 0.0

    def test_smooth_converges_to_step_monotonically(self, grid, geom):
        vstep = cs.build_potential(grid, geom, BarrierModel("step", v0=5.0))
        l1 = []
        for w in (8 * grid.dx, 4 * grid.dx, 2 * grid.dx):
            vs = cs.build_potential(grid, geom, BarrierModel("smooth", v0=5.0, w=w))
            l1.append(np.sum(np.abs(vs.data.real - vstep.data.real)) * grid.cell_area)
        assert l1[0] > l1[1] > l1[2]

    def test_smooth_under_resolved_rejected(self, grid, geom):
        with pytest.raises(InvalidArgumentError):
            cs.build_potential(grid, geom, BarrierModel("smooth", v0=5.0, w=0.3))

    def test_model_validation(self):
        with pytest.raises(InvalidArgumentError):
            BarrierModel("step")
        with pytest.raises(InvalidArgumentError):
            BarrierModel("smooth", v0=1.0)
        with pytest.raises(InvalidArgumentError):
            BarrierModel("soft", v0=1.0)


class TestFaceSegments:
    def test_counts_and_signs(self, grid, geom):
        faces = cs.face_segments(grid, geom)
        assert len(faces.entry) == 30
        assert len(faces.exit) == 30
        assert all(sign == -1 for _, sign in faces.entry)
        assert all(sign == +1 for _, sign in faces.exit)

    def test_face_columns(self, grid, geom):
        faces = cs.face_segments(grid, geom)
        assert grid.x()[faces.i_entry] == pytest.approx(geom.x_in)
        assert grid.x()[faces.i_exit] == pytest.approx(geom.x_out)

    def test_full_width_channel_no_faces(self, grid):
        geom = ChannelGeometry(x_in=0.0, ell=2.0, a=13.0, y_center=-0.125)
        faces = cs.face_segments(grid, geom)
        assert len(faces.entry) == 0 and len(faces.exit) == 0


class TestGeometryValidation:
    def test_negative_length_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ChannelGeometry(x_in=0.0, ell=-1.0, a=2.0)

    def test_negative_width_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ChannelGeometry(x_in=0.0, ell=1.0, a=-2.0)

    @given(st.floats(0.5, 4.0), st.floats(-1.0, 1.0))
    def test_step_set_equals_mask_for_random_geometry(self, a, y_center):
        grid = cs.build_grid(48, 40, 0.25, 0.25, -6.0, -5.0)
        geom = ChannelGeometry(x_in=-1.0, ell=2.0, a=a, y_center=y_center)
        v = cs.build_potential(grid, geom, BarrierModel("step", v0=2.0))
        assert np.array_equal(v.data.real != 0.0, cs.wall_mask(grid, geom))
