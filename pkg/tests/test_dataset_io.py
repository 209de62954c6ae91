import math

import numpy as np
import pytest

from sugar import (
    DataMatrix,
    LabeledDataset,
    SwissRollSpec,
    gen_circle,
    gen_gaussian_mixture,
    gen_swiss_roll,
    ks_uniform_test,
    load_csv,
    save_csv,
)
from sugar.dataset_io import swiss_roll_points


def angles(m):
    return np.arctan2(m.values[:, 1], m.values[:, 0])


class TestCsv:
    def test_parse_with_header(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,b\n1,2\n3,4\n")
        m = load_csv(p, has_header=True)
        assert m.rows == 2 and m.cols == 2
        assert m.col_names == ("a", "b")
        assert np.array_equal(m.values, [[1.0, 2.0], [3.0, 4.0]])

    def test_malformed_cell_reports_position(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3,x\n")
        with pytest.raises(ValueError, match="row 2, column 2"):
            load_csv(p)

    def test_ragged_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2\n3\n")
        with pytest.raises(ValueError, match="ragged"):
            load_csv(p)

    def test_empty_rejected(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("")
        with pytest.raises(ValueError, match="empty"):
            load_csv(p)

    def test_single_zero_writes_bare(self, tmp_path):
        p = tmp_path / "d.csv"
        save_csv(DataMatrix(np.array([[0.0]])), p)
        assert p.read_text() == "0\n"

    def test_header_line_written(self, tmp_path):
        p = tmp_path / "d.csv"
        save_csv(DataMatrix(np.array([[1.0, 2.0]]), ("x", "y")), p)
        assert p.read_text().splitlines()[0] == "x,y"

    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        m = DataMatrix(rng.standard_normal((17, 4)) * 10.0 ** rng.integers(-8, 8, (17, 4)))
        p = tmp_path / "d.csv"
        save_csv(m, p)
        back = load_csv(p)
        assert np.array_equal(back.values, m.values)

    def test_header_only_round_trips_empty(self, tmp_path):
        p = tmp_path / "d.csv"
        save_csv(DataMatrix(np.empty((0, 2)), ("x", "y")), p)
        back = load_csv(p, has_header=True)
        assert back.rows == 0 and back.cols == 2


class TestDataMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ValueError, match="finite"):
            DataMatrix(np.array([[np.nan]]))

    def test_rejects_wrong_name_count(self):
        with pytest.raises(ValueError):
            DataMatrix(np.ones((2, 2)), ("only",))

    def test_values_are_immutable(self):
        m = DataMatrix(np.ones((2, 2)))
        with pytest.raises(ValueError):
            m.values[0, 0] = 5.0


class TestLabeledDataset:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            LabeledDataset(DataMatrix(np.ones((3, 1))), np.array([0, 1]))

    def test_labels_must_cover_range(self):
        with pytest.raises(ValueError, match="missing"):
            LabeledDataset(DataMatrix(np.ones((3, 1))), np.array([0, 0, 2]))


class TestCircle:
    def test_points_on_unit_circle(self):
        m = gen_circle(200, bias=2.0, seed=5)
        radii = np.linalg.norm(m.values, axis=1)
        assert np.abs(radii - 1.0).max() < 1e-12

    def test_unbiased_angles_pass_uniformity(self):
        m = gen_circle(10000, bias=0.0, seed=11)
        res = ks_uniform_test(angles(m), (-math.pi, math.pi))
        assert res.p_value > 0.05

    def test_determinism(self):
        a = gen_circle(50, bias=1.0, seed=9)
        b = gen_circle(50, bias=1.0, seed=9)
        assert np.array_equal(a.values, b.values)

    def test_density_decays_from_center(self):
        m = gen_circle(20000, bias=2.0, seed=2)
        counts, _ = np.histogram(np.abs(angles(m)), bins=4, range=(0, math.pi))
        assert np.all(np.diff(counts) < 0)

    def test_rejects_tiny_n(self):
        with pytest.raises(ValueError):
            gen_circle(2)


class TestSwissRoll:
    def test_rolling_map_at_pi(self):
        row = swiss_roll_points([math.pi], [5.0])[0]
        assert np.allclose(row, [-6.0 * math.pi, 5.0, 0.0], atol=1e-12)

    def test_rows_lie_on_spiral(self):
        m = gen_swiss_roll(SwissRollSpec(n=300, seed=4))
        x, h, z = m.values[:, 0], m.values[:, 1], m.values[:, 2]
        r = np.hypot(x, z)
        assert np.abs(x - r * np.cos(r / 6.0)).max() < 1e-9
        assert np.abs(z - r * np.sin(r / 6.0)).max() < 1e-9
        assert np.all((h >= 0) & (h <= 20))

    def test_default_row_count_matches_fixture(self):
        assert gen_swiss_roll(SwissRollSpec(n=600, seed=0)).rows == 600

    def test_theta_density_decreases(self):
        m = gen_swiss_roll(SwissRollSpec(n=20000, theta_bias=1.5, seed=3))
        theta = np.hypot(m.values[:, 0], m.values[:, 2]) / 6.0
        counts, _ = np.histogram(theta, bins=4, range=(3 * math.pi / 2, 9 * math.pi / 2))
        assert np.all(np.diff(counts) < 0)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SwissRollSpec(n=10, h_range=(3.0, 3.0))


class TestMixture:
    def test_zero_covariance_collapses_to_mean(self):
        ds = gen_gaussian_mixture([([1.0, -2.0], 0.0, 1.0, 0)], n=40, seed=1)
        assert np.allclose(ds.data.values, [1.0, -2.0])
        assert set(ds.labels.tolist()) == {0}

    def test_counts_within_binomial_range(self):
        comps = [([0.0], 1.0, 0.9, 0), ([10.0], 1.0, 0.1, 1)]
        ds = gen_gaussian_mixture(comps, n=1000, seed=7)
        n1 = int((ds.labels == 1).sum())
        # binomial sd = sqrt(1000 * 0.9 * 0.1) = 9.49
        assert abs(n1 - 100) <= 4 * 9.49

    def test_sample_mean_near_component_mean(self):
        n = 4000
        ds = gen_gaussian_mixture([([2.0, 3.0], 1.0, 1.0, 0)], n=n, seed=5)
        err = np.abs(ds.data.values.mean(axis=0) - [2.0, 3.0]).max()
        assert err < 5.0 / math.sqrt(n)

    def test_non_psd_rejected(self):
        bad = [([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]], 1.0, 0)]
        with pytest.raises(ValueError, match="semidefinite"):
            gen_gaussian_mixture(bad, n=10, seed=0)

    def test_determinism(self):
        comps = [([0.0, 0.0], 1.0, 0.5, 0), ([4.0, 4.0], 1.0, 0.5, 1)]
        a = gen_gaussian_mixture(comps, n=100, seed=3)
        b = gen_gaussian_mixture(comps, n=100, seed=3)
        assert np.array_equal(a.data.values, b.data.values)
        assert np.array_equal(a.labels, b.labels)
