import math

import numpy as np
import pytest

from shaperec.geometry import HalfPlane, Point, cell_fraction
from shaperec.measurements import (
    CellAverageField,
    Disk,
    Grid,
    HalfPlaneShape,
    NoiseModel,
    RotatedSquare,
    add_noise,
    lq_error,
    measure,
)
from shaperec.recon import CellRecon, Reconstruction

from oracles import subgrid_shape_fraction

DISK = Disk((0.53, 0.51), 0.325)


def constant_recon(grid, value):
    return Reconstruction(grid, tuple(CellRecon.constant(value) for _ in range(grid.n)))


class TestGrid:
    def test_basic_quantities(self):
        grid = Grid(16)
        assert grid.h == 1.0 / 16
        assert grid.n == 256
        assert grid.cell(1, 1).center == Point(1.0 / 32, 1.0 / 32)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Grid(0)


class TestShapes:
    def test_disk_signed_distance(self):
        d = Disk((0.5, 0.5), 0.3)
        assert d.signed_distance(0.5, 0.5) == pytest.approx(-0.3)
        assert d.signed_distance(0.8, 0.5) == pytest.approx(0.0, abs=1e-15)
        assert d.signed_distance(0.9, 0.5) == pytest.approx(0.1)
        assert d.curvature_bound() == pytest.approx(1.0 / 0.3)
        assert d.area == pytest.approx(math.pi * 0.09)

    def test_disk_contains_matches_distance(self):
        d = Disk((0.53, 0.51), 0.325)
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 1, 200)
        y = rng.uniform(0, 1, 200)
        inside = d.contains(x, y)
        sd = d.signed_distance(x, y)
        assert np.all(inside == (sd <= 1e-15))

    def test_margin_violation_rejected(self):
        with pytest.raises(ValueError):
            Disk((0.5, 0.5), 0.4, margin=0.2)
        Disk((0.5, 0.5), 0.3, margin=0.2)  # exactly at the margin is fine

    def test_square_distance_axis_aligned(self):
        s = RotatedSquare((0.5, 0.5), 0.2, 0.0)
        assert s.signed_distance(0.5, 0.5) == pytest.approx(-0.2)
        assert s.signed_distance(0.75, 0.5) == pytest.approx(0.05)
        # corner distance is the Euclidean distance to the corner point
        assert s.signed_distance(0.8, 0.8) == pytest.approx(math.hypot(0.1, 0.1))
        assert s.area == pytest.approx(0.16)
        assert s.curvature_bound() == 0.0

    def test_square_rotation_consistency(self):
        angle = 0.35
        s0 = RotatedSquare((0.5, 0.5), 0.2, 0.0)
        s1 = RotatedSquare((0.5, 0.5), 0.2, angle)
        rng = np.random.default_rng(5)
        pts = rng.uniform(0, 1, (100, 2))
        ca, sa = math.cos(angle), math.sin(angle)
        # rotating the query point by -angle about the center must reproduce
        # the axis-aligned distance
        dx, dy = pts[:, 0] - 0.5, pts[:, 1] - 0.5
        qx, qy = 0.5 + ca * dx + sa * dy, 0.5 - sa * dx + ca * dy
        np.testing.assert_allclose(
            s1.signed_distance(pts[:, 0], pts[:, 1]), s0.signed_distance(qx, qy), atol=1e-14
        )

    def test_halfplane_shape_distance_sign(self):
        hp = HalfPlane(0.0, 0.1, Point(0.5, 0.5))  # {x - 0.5 >= 0.1}
        s = HalfPlaneShape(hp)
        assert s.contains(0.7, 0.5)
        assert not s.contains(0.55, 0.5)
        assert s.signed_distance(0.7, 0.5) == pytest.approx(-0.1)
        assert s.signed_distance(0.55, 0.5) == pytest.approx(0.05)


class TestMeasure:
    def test_halfplane_measure_is_exact_clip_route(self):
        rng = np.random.default_rng(11)
        grid = Grid(8)
        for _ in range(5):
            theta = rng.uniform(0, 2 * math.pi)
            c = rng.uniform(-0.3, 0.3)
            hp = HalfPlane(theta, c, Point(0.5, 0.5))
            field = measure(HalfPlaneShape(hp), grid)
            for i in range(1, 9):
                for j in range(1, 9):
                    assert field.value(i, j) == cell_fraction(hp, grid.cell(i, j))

    def test_centered_disk_quadrants(self):
        """Disk r=1/4 centered on a 2x2 grid: every cell average is pi/16."""
        field = measure(Disk((0.5, 0.5), 0.25), Grid(2))
        np.testing.assert_allclose(field.values, math.pi / 16.0, atol=1e-9)

    def test_disk_against_subgrid_counting(self):
        grid = Grid(16)
        field = measure(DISK, grid)
        for i in range(1, 17):
            for j in range(1, 17):
                ref = subgrid_shape_fraction(DISK, grid.cell(i, j).center, grid.h, 1024)
                assert abs(field.value(i, j) - ref) <= 2e-3

    @pytest.mark.parametrize("L", [16, 32])
    def test_disk_mass(self, L):
        field = measure(DISK, Grid(L))
        mass = field.values.sum() * Grid(L).h ** 2
        assert abs(mass - DISK.area) <= 1e-8

    def test_square_mass(self):
        s = RotatedSquare((0.48, 0.52), 0.21, 0.4)
        field = measure(s, Grid(16))
        mass = field.values.sum() * (1.0 / 16) ** 2
        assert abs(mass - s.area) <= 1e-8

    def test_axis_aligned_square_is_interval_product(self):
        s = RotatedSquare((0.47, 0.55), 0.23, 0.0)
        grid = Grid(8)
        field = measure(s, grid)
        h = grid.h

        def overlap(lo, hi, a, b):
            return max(0.0, min(hi, b) - max(lo, a))

        for i in range(1, 9):
            for j in range(1, 9):
                fx = overlap((i - 1) * h, i * h, 0.47 - 0.23, 0.47 + 0.23)
                fy = overlap((j - 1) * h, j * h, 0.55 - 0.23, 0.55 + 0.23)
                assert field.value(i, j) == pytest.approx(fx * fy / h**2, abs=1e-9)

    def test_rotated_square_against_subgrid_counting(self):
        s = RotatedSquare((0.5, 0.5), 0.25, math.pi / 6)
        grid = Grid(8)
        field = measure(s, grid)
        for i in range(1, 9):
            for j in range(1, 9):
                ref = subgrid_shape_fraction(s, grid.cell(i, j).center, grid.h, 1024)
                assert abs(field.value(i, j) - ref) <= 2e-3

    def test_values_within_unit_interval(self):
        for shape in (DISK, RotatedSquare((0.5, 0.5), 0.2, 1.1)):
            field = measure(shape, Grid(16))
            assert field.values.min() >= -1e-12
            assert field.values.max() <= 1.0 + 1e-12

    def test_monotone_under_inclusion(self):
        grid = Grid(16)
        small = measure(Disk((0.5, 0.5), 0.2), grid)
        large = measure(Disk((0.5, 0.5), 0.3), grid)
        assert np.all(small.values <= large.values + 1e-12)


class TestNoise:
    def test_linf_magnitude_is_exact(self):
        field = measure(DISK, Grid(8))
        noisy, eta = add_noise(field, NoiseModel(math.inf, 1.0 / 18, seed=0))
        assert np.abs(eta).max() == 1.0 / 18
        np.testing.assert_array_equal(noisy.values, field.values + eta)

    def test_l2_magnitude(self):
        field = measure(DISK, Grid(8))
        _, eta = add_noise(field, NoiseModel(2.0, 0.01, seed=4))
        assert math.sqrt(float(eta @ eta)) == pytest.approx(0.01, abs=1e-14)

    def test_l1_magnitude(self):
        field = measure(DISK, Grid(8))
        _, eta = add_noise(field, NoiseModel(1.0, 0.5, seed=4))
        assert np.abs(eta).sum() == pytest.approx(0.5, abs=1e-13)

    def test_zero_eps_is_noiseless(self):
        field = measure(DISK, Grid(8))
        noisy, eta = add_noise(field, NoiseModel(math.inf, 0.0, seed=9))
        assert np.all(eta == 0.0)
        np.testing.assert_array_equal(noisy.values, field.values)

    def test_seed_reproducibility(self):
        field = measure(DISK, Grid(8))
        _, eta1 = add_noise(field, NoiseModel(2.0, 0.01, seed=7))
        _, eta2 = add_noise(field, NoiseModel(2.0, 0.01, seed=7))
        _, eta3 = add_noise(field, NoiseModel(2.0, 0.01, seed=8))
        np.testing.assert_array_equal(eta1, eta2)
        assert not np.array_equal(eta1, eta3)

    def test_invalid_p_rejected(self):
        with pytest.raises(ValueError):
            NoiseModel(3.0, 0.1, seed=0)


class TestLqError:
    def test_matching_halfplane_recon_has_zero_error(self):
        hp = HalfPlane(1.1, 0.07, Point(0.5, 0.5))
        grid = Grid(16)
        recon = Reconstruction(grid, tuple(CellRecon.interface(hp) for _ in range(grid.n)))
        assert lq_error(HalfPlaneShape(hp), recon, 1.0) <= 1e-12

    def test_zero_recon_error_is_disk_area(self):
        err = lq_error(DISK, constant_recon(Grid(16), 0.0), 1.0)
        assert abs(err - DISK.area) <= 2e-4

    def test_q_power_identity_for_indicators(self):
        # |u - v| is 0/1 when both functions are indicators, so the L^2
        # error must equal the square root of the L^1 error
        e1 = lq_error(DISK, constant_recon(Grid(16), 0.0), 1.0)
        e2 = lq_error(DISK, constant_recon(Grid(16), 0.0), 2.0)
        assert e2 == pytest.approx(math.sqrt(e1), abs=1e-12)

    def test_inner_only_ignores_boundary_cells(self):
        grid = Grid(8)
        base = [CellRecon.constant(0.0)] * grid.n
        junk = list(base)
        for i in range(1, 9):
            for j in range(1, 9):
                if i in (1, 8) or j in (1, 8):
                    junk[(i - 1) * 8 + (j - 1)] = CellRecon.constant(123.0)
        r_base = Reconstruction(grid, tuple(base))
        r_junk = Reconstruction(grid, tuple(junk))
        e_base = lq_error(DISK, r_base, 1.0, inner_only=True)
        e_junk = lq_error(DISK, r_junk, 1.0, inner_only=True)
        assert e_base == e_junk
        assert lq_error(DISK, r_junk, 1.0) > e_junk

    def test_rejects_q_below_one(self):
        with pytest.raises(ValueError):
            lq_error(DISK, constant_recon(Grid(4), 0.0), 0.5)


class TestFieldContainer:
    def test_round_trip_indexing(self):
        grid = Grid(3)
        vals = np.arange(9, dtype=float)
        field = CellAverageField(grid, vals)
        assert field.value(1, 1) == 0.0
        assert field.value(1, 3) == 2.0
        assert field.value(3, 1) == 6.0
        assert field.as_grid()[2, 0] == 6.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            CellAverageField(Grid(3), np.zeros(8))
